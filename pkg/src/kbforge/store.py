"""Indexed in-process triple store.

Triples are interned into integer ids and kept in three numpy access
paths (subject-predicate-object, predicate-object-subject,
object-subject-predicate), each a sorted column family with a packed
uint64 key over its two leading columns, so every pattern shape is a
binary search. Single-writer / multi-reader: mutation marks the store
dirty and the next read rebuilds the indexes.

The internal file format is JSON-lines, one object per triple
``{"s", "p", "o_kind", "o"}``, with a ``# kbforge-triples v1`` header.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .model import ENTITY, LITERAL, EntityId, TermValue, Triple, normalize_label

JSONL_HEADER = "# kbforge-triples v1"


class MalformedTriple(ValueError):
    """A triple row that violates the data model."""


@dataclass(frozen=True)
class TriplePattern:
    """Match template; None means wildcard."""

    subject: str | None = None
    predicate: str | None = None
    object: TermValue | None = None


def _pack(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    return (hi.astype(np.uint64) << np.uint64(32)) | lo.astype(np.uint64)


class _Index:
    """One access path: rows sorted by (a, b, c) with a packed (a, b) key."""

    def __init__(self, a: np.ndarray, b: np.ndarray, c: np.ndarray):
        order = np.lexsort((c, b, a))
        self.a = a[order]
        self.b = b[order]
        self.c = c[order]
        self.key_ab = _pack(self.a, self.b)

    def range_a(self, a: int) -> tuple[int, int]:
        return (
            int(np.searchsorted(self.a, a, "left")),
            int(np.searchsorted(self.a, a, "right")),
        )

    def range_ab(self, a: int, b: int) -> tuple[int, int]:
        key = np.uint64((a << 32) | b)
        return (
            int(np.searchsorted(self.key_ab, key, "left")),
            int(np.searchsorted(self.key_ab, key, "right")),
        )

    def range_abc(self, a: int, b: int, c: int) -> tuple[int, int]:
        lo, hi = self.range_ab(a, b)
        inner = self.c[lo:hi]
        return (
            lo + int(np.searchsorted(inner, c, "left")),
            lo + int(np.searchsorted(inner, c, "right")),
        )


class TripleStore:
    def __init__(self) -> None:
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}
        self._s: list[int] = []
        self._p: list[int] = []
        self._o: list[int] = []  # object code: term_id * 2 + (1 if literal)
        self._seen: set[tuple[int, int, int]] = set()
        self._dirty = True
        self._spo: _Index | None = None
        self._pos: _Index | None = None
        self._osp: _Index | None = None
        self._entity_label_rows: list[tuple[str, str]] = []  # (lowered, label)
        self._predicate_counts: dict[str, int] = {}
        self._class_counts: dict[str, int] = {}

    # ------------------------------------------------------------------
    # loading

    def _term_id(self, label: str) -> int:
        tid = self._ids.get(label)
        if tid is None:
            tid = len(self._labels)
            self._ids[label] = tid
            self._labels.append(label)
        return tid

    def _obj_code(self, kind: str, text: str) -> int:
        return self._term_id(text) * 2 + (1 if kind == LITERAL else 0)

    def _insert_row(self, s: str, p: str, o_kind: str, o: str) -> bool:
        row = (self._term_id(s), self._term_id(p), self._obj_code(o_kind, o))
        if row in self._seen:
            return False
        self._seen.add(row)
        self._s.append(row[0])
        self._p.append(row[1])
        self._o.append(row[2])
        self._dirty = True
        return True

    def insert(self, triple: Triple) -> bool:
        """Set-semantics insert; returns False when already present."""
        if not isinstance(triple, Triple):
            raise MalformedTriple(f"not a triple: {triple!r}")
        return self._insert_row(
            triple.subject.label, triple.predicate, triple.object.kind, triple.object.text
        )

    def bulk_load(self, triples: Iterable[Triple]) -> int:
        return sum(1 for t in triples if self.insert(t))

    def bulk_load_rows(self, rows: Iterable[tuple[str, str, str, str]]) -> int:
        """Fast path for trusted, already-normalized (s, p, o_kind, o) rows."""
        inserted = 0
        for s, p, o_kind, o in rows:
            if o_kind not in (ENTITY, LITERAL):
                raise MalformedTriple(f"bad object kind: {o_kind!r}")
            if not s or not p:
                raise MalformedTriple(f"empty subject or predicate in ({s!r}, {p!r})")
            if self._insert_row(s, p, o_kind, o):
                inserted += 1
        return inserted

    def __len__(self) -> int:
        return len(self._s)

    def __contains__(self, triple: Triple) -> bool:
        s = self._ids.get(triple.subject.label)
        p = self._ids.get(triple.predicate)
        t = self._ids.get(triple.object.text)
        if s is None or p is None or t is None:
            return False
        return (s, p, t * 2 + (1 if triple.object.kind == LITERAL else 0)) in self._seen

    # ------------------------------------------------------------------
    # indexes

    def _freeze(self) -> None:
        if not self._dirty:
            return
        if len(self._labels) >= 1 << 31:
            raise MemoryError("term dictionary exceeds 31-bit id space")
        s = np.asarray(self._s, dtype=np.int64)
        p = np.asarray(self._p, dtype=np.int64)
        o = np.asarray(self._o, dtype=np.int64)
        self._spo = _Index(s, p, o)
        self._pos = _Index(p, o, s)
        self._osp = _Index(o, s, p)
        entity_ids = np.union1d(s, o[(o % 2) == 0] // 2)
        self._entity_label_rows = sorted(
            (self._labels[int(tid)].lower(), self._labels[int(tid)]) for tid in entity_ids
        )
        uniq, counts = np.unique(p, return_counts=True)
        self._predicate_counts = {
            self._labels[int(tid)]: int(n) for tid, n in zip(uniq, counts)
        }
        self._class_counts = {}
        inst = self._ids.get("instanceOf")
        if inst is not None:
            mask = p == inst
            uniq, counts = np.unique(o[mask], return_counts=True)
            self._class_counts = {
                self._labels[int(code) // 2]: int(n) for code, n in zip(uniq, counts)
            }
        self._dirty = False

    def _row_triple(self, s: int, p: int, o: int) -> Triple:
        kind = LITERAL if o % 2 else ENTITY
        return Triple(
            EntityId(self._labels[s]),
            self._labels[p],
            TermValue(kind, self._labels[o // 2]),
        )

    def _pattern_ids(self, pattern: TriplePattern) -> tuple[int | None, int | None, int | None] | None:
        """Interned pattern ids; None overall when a bound term is unknown."""
        s = p = o = None
        if pattern.subject is not None:
            s = self._ids.get(pattern.subject)
            if s is None:
                return None
        if pattern.predicate is not None:
            p = self._ids.get(pattern.predicate)
            if p is None:
                return None
        if pattern.object is not None:
            tid = self._ids.get(pattern.object.text)
            if tid is None:
                return None
            o = tid * 2 + (1 if pattern.object.kind == LITERAL else 0)
        return (s, p, o)

    def plan_index(self, pattern: TriplePattern) -> str:
        """Which access path serves this pattern shape (as used by match)."""
        s, p, o = pattern.subject is not None, pattern.predicate is not None, pattern.object is not None
        if s and p:
            return "spo"
        if s and o:
            return "osp"
        if s:
            return "spo"
        if p:
            return "pos"
        if o:
            return "osp"
        return "spo"

    def _match_range(self, ids: tuple[int | None, int | None, int | None]) -> tuple[_Index, int, int]:
        s, p, o = ids
        if s is not None and p is not None and o is not None:
            index = self._spo
            lo, hi = index.range_abc(s, p, o)
        elif s is not None and p is not None:
            index = self._spo
            lo, hi = index.range_ab(s, p)
        elif s is not None and o is not None:
            index = self._osp
            lo, hi = index.range_ab(o, s)
        elif s is not None:
            index = self._spo
            lo, hi = index.range_a(s)
        elif p is not None and o is not None:
            index = self._pos
            lo, hi = index.range_ab(p, o)
        elif p is not None:
            index = self._pos
            lo, hi = index.range_a(p)
        elif o is not None:
            index = self._osp
            lo, hi = index.range_a(o)
        else:
            index = self._spo
            lo, hi = 0, len(self._s)
        return index, lo, hi

    def match(self, pattern: TriplePattern = TriplePattern()) -> Iterator[Triple]:
        """Stream triples unifying with the pattern, in index order."""
        self._freeze()
        ids = self._pattern_ids(pattern)
        if ids is None or not self._s:
            return
        index, lo, hi = self._match_range(ids)
        name = self.plan_index(pattern)
        for i in range(lo, hi):
            a, b, c = int(index.a[i]), int(index.b[i]), int(index.c[i])
            if name == "spo":
                yield self._row_triple(a, b, c)
            elif name == "pos":
                yield self._row_triple(c, a, b)
            else:
                yield self._row_triple(b, c, a)

    def count(self, pattern: TriplePattern = TriplePattern()) -> int:
        """Matching-row count without materializing triples."""
        self._freeze()
        ids = self._pattern_ids(pattern)
        if ids is None or not self._s:
            return 0
        _, lo, hi = self._match_range(ids)
        return hi - lo

    # ------------------------------------------------------------------
    # derived views

    @property
    def predicate_counts(self) -> dict[str, int]:
        self._freeze()
        return self._predicate_counts

    @property
    def class_counts(self) -> dict[str, int]:
        self._freeze()
        return self._class_counts

    def entity_labels(self) -> list[str]:
        """All entity labels (subjects plus entity objects), sorted case-insensitively."""
        self._freeze()
        return [label for _, label in self._entity_label_rows]

    def has_entity(self, label: str) -> bool:
        tid = self._ids.get(label)
        if tid is None:
            return False
        self._freeze()
        rows = self._entity_label_rows
        i = bisect.bisect_left(rows, (label.lower(), label))
        return i < len(rows) and rows[i][1] == label

    def search_entities(self, query: str, limit: int = 20) -> tuple[int, list[str]]:
        """Case-insensitive substring search over entity labels.

        Ranking: exact match, then prefix match, then shorter label,
        then lexicographic. Returns (total match count, limited page).
        """
        q = normalize_label(query).lower()
        self._freeze()
        hits = [
            (lowered != q, not lowered.startswith(q), len(label), label)
            for lowered, label in self._entity_label_rows
            if q in lowered
        ]
        hits.sort()
        return len(hits), [h[3] for h in hits[: max(0, limit)]]

    def iter_triples(self) -> Iterator[Triple]:
        return self.match()

    def triples_snapshot(self) -> set[Triple]:
        return set(self.match())


# ----------------------------------------------------------------------
# JSON-lines format


def write_jsonl(path: str | Path, triples: Iterable[Triple]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(JSONL_HEADER + "\n")
        for t in triples:
            fh.write(
                json.dumps(
                    {"s": t.subject.label, "p": t.predicate, "o_kind": t.object.kind, "o": t.object.text},
                    ensure_ascii=False,
                )
                + "\n"
            )
            count += 1
    return count


def read_jsonl_rows(path: str | Path) -> Iterator[tuple[str, str, str, str]]:
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = json.loads(line)
                yield (row["s"], row["p"], row["o_kind"], row["o"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedTriple(f"{path}:{lineno}: bad triple row: {exc}") from None


def load_jsonl(path: str | Path) -> TripleStore:
    store = TripleStore()
    store.bulk_load_rows(read_jsonl_rows(path))
    return store


def load_store(path: str | Path) -> TripleStore:
    """Load a store from .ttl (Turtle) or .jsonl by file suffix."""
    path = Path(path)
    if path.suffix == ".ttl":
        from .turtle import parse_turtle_file

        return parse_turtle_file(path)
    return load_jsonl(path)
