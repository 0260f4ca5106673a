"""Post-hoc label canonicalization.

Relation labels (and class labels, read off the instance-of predicate's
objects) are greedily merged into more frequent labels whenever embedding
cosine similarity reaches the threshold. Processing order is ascending
frequency with lexicographic tie-break; merge targets must be strictly
more frequent, which keeps the mapping acyclic; chains are closed so every
entry points at its final canonical label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .oracles.base import EmbeddingClient

INSTANCE_OF = "instanceOf"

Row = tuple[str, str, str, str]  # (s, p, o_kind, o)


class UnknownLabel(KeyError):
    """A triple uses a label outside the mapping's domain."""


@dataclass(frozen=True)
class LabelStats:
    label: str
    frequency: int

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ValueError(f"frequency must be >= 1: {self}")


@dataclass(frozen=True)
class Merge:
    source: str
    target: str  # direct target at merge time (not the closed one)
    similarity: float


@dataclass
class CanonMapping:
    kind: str  # "relation" or "class"
    threshold: float
    entries: dict[str, str] = field(default_factory=dict)
    merges: list[Merge] = field(default_factory=list)

    def canonical(self, label: str) -> str:
        try:
            return self.entries[label]
        except KeyError:
            raise UnknownLabel(f"{self.kind} label not in mapping: {label!r}") from None

    def domain(self) -> set[str]:
        return set(self.entries)

    def canonical_labels(self) -> set[str]:
        return set(self.entries.values())

    @classmethod
    def identity(cls, kind: str, threshold: float, labels: Iterable[str]) -> "CanonMapping":
        return cls(kind=kind, threshold=threshold, entries={label: label for label in labels})


def greedy_canonicalize(
    stats: list[LabelStats], threshold: float, embedder: EmbeddingClient, kind: str = "relation"
) -> CanonMapping:
    """Merge labels into strictly-more-frequent ones by embedding similarity.

    Labels are processed in ascending (frequency, label) order; each is
    compared against every strictly more frequent label and merged into the
    most similar one when the cosine reaches the threshold. Similarity ties
    prefer the higher-frequency, then lexicographically smaller, target.
    """
    if not stats:
        raise ValueError("no label statistics to canonicalize")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1]: {threshold}")
    ordered = sorted(stats, key=lambda st: (st.frequency, st.label))
    labels = [st.label for st in ordered]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate labels in statistics")
    freqs = np.array([st.frequency for st in ordered], dtype=np.int64)
    emb = np.ascontiguousarray(embedder.embed_batch(labels), dtype=np.float32)

    # first strictly-more-frequent index per row, in the ascending order
    first_candidate = np.searchsorted(freqs, freqs, side="right").astype(np.int64)
    # tie preference: higher frequency first, then lexicographically smaller
    by_preference = sorted(range(len(labels)), key=lambda i: (-int(freqs[i]), labels[i]))
    preference = np.empty(len(labels), dtype=np.int64)
    preference[by_preference] = np.arange(len(labels))

    best, best_sim = kernels.best_merge_targets(emb, first_candidate, preference)

    direct: dict[str, str] = {}
    merges: list[Merge] = []
    for i, label in enumerate(labels):
        if best[i] >= 0 and best_sim[i] >= threshold:
            target = labels[int(best[i])]
            direct[label] = target
            merges.append(Merge(label, target, float(best_sim[i])))

    entries: dict[str, str] = {}

    def resolve(label: str) -> str:
        seen = [label]
        while seen[-1] in direct:
            seen.append(direct[seen[-1]])
        return seen[-1]

    for label in labels:
        entries[label] = resolve(label)
    return CanonMapping(kind=kind, threshold=threshold, entries=entries, merges=merges)


def relation_stats(rows: Iterable[Row]) -> list[LabelStats]:
    counts: dict[str, int] = {}
    for _, p, _, _ in rows:
        counts[p] = counts.get(p, 0) + 1
    return [LabelStats(label, n) for label, n in sorted(counts.items())]


def class_stats(rows: Iterable[Row], instance_predicate: str = INSTANCE_OF) -> list[LabelStats]:
    counts: dict[str, int] = {}
    for _, p, _, o in rows:
        if p == instance_predicate:
            counts[o] = counts.get(o, 0) + 1
    return [LabelStats(label, n) for label, n in sorted(counts.items())]


@dataclass
class RewriteReport:
    relations_before: int
    relations_after: int
    classes_before: int
    classes_after: int
    duplicates_removed: int
    merges: list[dict]

    def to_json(self) -> str:
        return json.dumps(
            {
                "relations_before": self.relations_before,
                "relations_after": self.relations_after,
                "classes_before": self.classes_before,
                "classes_after": self.classes_after,
                "duplicates_removed": self.duplicates_removed,
                "merges": self.merges,
            },
            indent=2,
            ensure_ascii=False,
        )


def apply_mapping(
    rows: Iterable[Row],
    relation_mapping: CanonMapping,
    class_mapping: CanonMapping,
    instance_predicate: str = INSTANCE_OF,
) -> tuple[list[Row], RewriteReport]:
    """Rewrite predicates and instance-of objects to their canonical labels.

    The mappings must cover every label the rows use (they are built over
    the same triple set); anything else raises UnknownLabel. Exact
    duplicates created by rewriting are dropped and counted.
    """
    rows = list(rows)
    canon_instance = (
        relation_mapping.entries.get(instance_predicate, instance_predicate)
    )
    out: list[Row] = []
    seen: set[Row] = set()
    duplicates = 0
    classes_before: set[str] = set()
    classes_after: set[str] = set()
    for s, p, o_kind, o in rows:
        p2 = relation_mapping.canonical(p)
        o2 = o
        if p2 == canon_instance:
            classes_before.add(o)
            o2 = class_mapping.canonical(o)
            classes_after.add(o2)
        row = (s, p2, o_kind, o2)
        if row in seen:
            duplicates += 1
            continue
        seen.add(row)
        out.append(row)
    merges = [
        {"kind": m_kind, "from": m.source, "to": m.target, "similarity": m.similarity}
        for m_kind, mapping in (("relation", relation_mapping), ("class", class_mapping))
        for m in mapping.merges
    ]
    report = RewriteReport(
        relations_before=len({p for _, p, _, _ in rows}),
        relations_after=len({p for _, p, _, _ in out}),
        classes_before=len(classes_before),
        classes_after=len(classes_after),
        duplicates_removed=duplicates,
        merges=merges,
    )
    return out, report


def consolidate_rows(
    rows: Iterable[Row],
    threshold: float,
    embedder: EmbeddingClient,
    instance_predicate: str = INSTANCE_OF,
) -> tuple[list[Row], RewriteReport, CanonMapping, CanonMapping]:
    """Full consolidation pass: relations first, then classes, then rewrite."""
    rows = list(rows)
    rel_stats = relation_stats(rows)
    if rel_stats:
        rel_map = greedy_canonicalize(rel_stats, threshold, embedder, kind="relation")
    else:
        rel_map = CanonMapping.identity("relation", threshold, [])
    canon_instance = rel_map.entries.get(instance_predicate, instance_predicate)
    rewritten_preds = [(s, rel_map.canonical(p), k, o) for s, p, k, o in rows]
    cls_stats = class_stats(rewritten_preds, canon_instance)
    if cls_stats:
        cls_map = greedy_canonicalize(cls_stats, threshold, embedder, kind="class")
    else:
        cls_map = CanonMapping.identity("class", threshold, [])
    # classes were gathered post-rewrite, so apply against the original rows
    # with a relation mapping whose domain still matches them
    out, report = apply_mapping(rows, rel_map, cls_map, instance_predicate)
    return out, report, rel_map, cls_map
