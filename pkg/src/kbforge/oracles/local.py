"""Oracle-free local implementations: rule-based NER and the trigram embedder."""

from __future__ import annotations

import unicodedata

import numpy as np

from .. import kernels
from ..model import normalize_label
from .base import EmbeddingClient, NerClient


def _looks_like_proper_name(label: str) -> bool:
    """Every whitespace-separated token starts with an uppercase/titlecase letter."""
    tokens = label.split(" ")
    for token in tokens:
        if unicodedata.category(token[0]) not in ("Lu", "Lt"):
            return False
    return True


class RuleBasedNer(NerClient):
    """Capitalized proper names and gazetteer members count as entities."""

    def __init__(self, gazetteer: set[str] | None = None):
        self.gazetteer = {normalize_label(g) for g in gazetteer} if gazetteer else set()

    def extract(self, candidates: list[str]) -> list[str]:
        out = []
        for raw in candidates:
            label = normalize_label(raw)
            if label in self.gazetteer or _looks_like_proper_name(label):
                out.append(label)
        return out


class TrigramEmbedder(EmbeddingClient):
    """Deterministic hashed character-trigram embedding (see kernels module)."""

    dim = kernels.EMBED_DIM

    def embed(self, label: str) -> np.ndarray:
        return self.embed_batch([label])[0]

    def embed_batch(self, labels: list[str]) -> np.ndarray:
        normalized = [normalize_label(label) for label in labels]
        return kernels.embed_labels(normalized)
