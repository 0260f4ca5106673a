"""Knowledge-base statistics and the canned analysis battery."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .consolidate import INSTANCE_OF, RewriteReport
from .model import DEFAULT_NAMESPACES, ENTITY, normalize_label
from .query import QueryError, evaluate, parse_query
from .query.evaluate import _text_term  # stable text rendering for report tables
from .store import TripleStore

CANNED_ANALYSES = (
    "class_frequency",
    "nationality",
    "gender",
    "eu_citizens",
    "spouse_symmetry",
)


@dataclass
class KBStatistics:
    entities: int
    triples: int
    triples_with_meta: int
    relations_raw: int
    relations_canonical: int
    classes_raw: int
    classes_canonical: int
    object_entities: int
    object_literals: int
    avg_triples_per_entity: float
    avg_label_length: float
    reference_overlap: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compute_stats(
    store: TripleStore,
    canon_report: RewriteReport | None = None,
    reference_labels: set[str] | None = None,
) -> KBStatistics:
    """One pass over the store; meta-relations counted separately.

    Average label length covers entity labels. Reference overlap is the
    fraction of entity labels present in the supplied label set (exact
    normalized match), omitted when no reference is given.
    """
    entity_set: set[str] = set()
    predicates: set[str] = set()
    classes: set[str] = set()
    content = 0
    with_meta = 0
    object_entities = 0
    object_literals = 0
    for triple in store.iter_triples():
        with_meta += 1
        if triple.is_meta:
            continue
        content += 1
        entity_set.add(triple.subject.label)
        predicates.add(triple.predicate)
        if triple.object.kind == ENTITY:
            object_entities += 1
            entity_set.add(triple.object.text)
        else:
            object_literals += 1
        if triple.predicate == INSTANCE_OF:
            classes.add(triple.object.text)
    n_entities = len(entity_set)
    overlap = None
    if reference_labels is not None:
        reference = {normalize_label(label) for label in reference_labels}
        overlap = (
            sum(1 for label in entity_set if label in reference) / n_entities
            if n_entities
            else 0.0
        )
    return KBStatistics(
        entities=n_entities,
        triples=content,
        triples_with_meta=with_meta,
        relations_raw=canon_report.relations_before if canon_report else len(predicates),
        relations_canonical=canon_report.relations_after if canon_report else len(predicates),
        classes_raw=canon_report.classes_before if canon_report else len(classes),
        classes_canonical=canon_report.classes_after if canon_report else len(classes),
        object_entities=object_entities,
        object_literals=object_literals,
        avg_triples_per_entity=content / n_entities if n_entities else 0.0,
        avg_label_length=(
            sum(len(label) for label in entity_set) / n_entities if n_entities else 0.0
        ),
        reference_overlap=overlap,
    )


def canned_query_text(name: str) -> str:
    return (
        resources.files("kbforge").joinpath("queries").joinpath(f"{name}.sparql")
        .read_text(encoding="utf-8")
    )


def run_canned_analyses(store: TripleStore, timeout_seconds: float = 100.0) -> list[dict]:
    """Execute the five canned analyses; per-query failures don't stop the rest."""
    out = []
    for name in CANNED_ANALYSES:
        text = canned_query_text(name)
        entry: dict = {"name": name, "query": text}
        try:
            table = evaluate(parse_query(text), store, timeout_seconds=timeout_seconds)
            entry["columns"] = table.columns
            entry["rows"] = [
                [_text_term(row.get(col), DEFAULT_NAMESPACES) for col in table.columns]
                for row in table.rows
            ]
        except QueryError as exc:
            entry["error"] = str(exc)
        out.append(entry)
    return out


def load_reference_labels(path: str | Path) -> set[str]:
    """One label per line; blank lines and '#' comments ignored."""
    labels = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            labels.add(normalize_label(line))
    return labels
