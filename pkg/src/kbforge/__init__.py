"""kbforge: recursive knowledge materialization, consolidation, storage,
querying and serving of a label-addressed knowledge base."""

__version__ = "0.1.0"
