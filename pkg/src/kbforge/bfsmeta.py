"""Post-hoc structural annotation: shortest-path layers and parents.

Crawl parallelization distorts the layer at which entities get claimed,
so layers are recomputed here from the recorded discovery edges and
materialized as bfsLayer / bfsParent meta-triples.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path
from typing import Iterable, Iterator

from .model import ENTITY, EntityId, TermValue, Triple

EDGES_HEADER = "# kbforge-edges v1"


class SeedMissing(ValueError):
    """The seed entity does not appear in the discovery graph."""


class MetaOverlay:
    def __init__(self, seed: str, layers: dict[str, int], parents: dict[str, set[str]], unreachable: list[str]):
        self.seed = seed
        self.layers = layers
        self.parents = parents
        self.unreachable = unreachable


def compute_bfs_meta(edges: Iterable[tuple[str, str]], seed: str) -> MetaOverlay:
    """Single-source shortest paths over directed discovery edges.

    parents(e) collects every predecessor one layer up, so an entity
    discovered from several others keeps all of them. Nodes unreachable
    from the seed are reported, not annotated.
    """
    adjacency: dict[str, list[str]] = {}
    nodes: set[str] = set()
    for parent, child in edges:
        adjacency.setdefault(parent, []).append(child)
        nodes.add(parent)
        nodes.add(child)
    if nodes and seed not in nodes:
        raise SeedMissing(f"seed {seed!r} not in discovery graph")
    nodes.add(seed)  # a lone seed with no edges is still layer 0
    layers: dict[str, int] = {seed: 0}
    queue: deque[str] = deque([seed])
    while queue:
        node = queue.popleft()
        for child in adjacency.get(node, ()):
            if child not in layers:
                layers[child] = layers[node] + 1
                queue.append(child)
    parents: dict[str, set[str]] = {seed: set()}
    for parent, children in adjacency.items():
        if parent not in layers:
            continue
        for child in children:
            if child in layers and layers[parent] == layers[child] - 1:
                parents.setdefault(child, set()).add(parent)
    for node in layers:
        parents.setdefault(node, set())
    unreachable = sorted(nodes - set(layers))
    return MetaOverlay(seed=seed, layers=layers, parents=parents, unreachable=unreachable)


def materialize_meta(overlay: MetaOverlay) -> list[Triple]:
    """One bfsLayer triple per entity plus one bfsParent triple per parent."""
    out: list[Triple] = []
    for label in sorted(overlay.layers):
        out.append(
            Triple(EntityId(label), "bfsLayer", TermValue.literal(str(overlay.layers[label])))
        )
        for parent in sorted(overlay.parents.get(label, ())):
            out.append(Triple(EntityId(label), "bfsParent", TermValue(ENTITY, parent)))
    return out


def edges_from_triples(rows: Iterable[tuple[str, str, str, str]]) -> Iterator[tuple[str, str]]:
    """Alternative edge source: every (subject -> entity object) statement."""
    for s, _, o_kind, o in rows:
        if o_kind == ENTITY:
            yield (s, o)


def write_edges(path: str | Path, edges: Iterable[tuple[str, str]]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(EDGES_HEADER + "\n")
        for parent, child in edges:
            fh.write(json.dumps({"parent": parent, "child": child}, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_edges(path: str | Path) -> Iterator[tuple[str, str]]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            row = json.loads(line)
            yield (row["parent"], row["child"])
