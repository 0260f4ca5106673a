"""Deterministic desk-scale oracle: a generated world with known ground truth.

The world is a pure function of (seed, size parameters), so crawls,
comparisons and verification runs against it are bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from ..model import EntityId, normalize_label
from .base import ElicitationClient, ElicitationResult, NerClient

ENTITY_RELATIONS = ("linksTo", "knows", "partOf", "locatedIn", "memberOf")
CLASS_NAMES = ("widget", "gadget", "region", "concept", "artifact")
COLORS = ("red", "blue", "green", "amber", "violet")

# (predicate, object text, object is an entity reference)
Fact = tuple[str, str, bool]


def _sub_rng(seed: int, *parts: str) -> random.Random:
    digest = hashlib.sha256(("%d|" % seed + "|".join(parts)).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class SyntheticWorld:
    seed: int
    entities: list[str]
    edges: dict[str, tuple[Fact, ...]]
    hallucination_rate: float = 0.0
    entity_set: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        self.entity_set = frozenset(self.entities)

    @classmethod
    def generate(
        cls,
        seed: int,
        n_entities: int,
        hallucination_rate: float = 0.0,
        max_out_degree: int = 4,
    ) -> "SyntheticWorld":
        rng = random.Random(seed)
        entities = [f"E{i}" for i in range(n_entities)]
        edges: dict[str, tuple[Fact, ...]] = {}
        for i, label in enumerate(entities):
            facts: list[Fact] = []
            # the seed entity always has somewhere to go
            degree = rng.randint(2, max_out_degree) if i == 0 else rng.randint(0, max_out_degree)
            seen: set[tuple[str, str]] = set()
            for _ in range(degree):
                target = entities[rng.randrange(n_entities)]
                predicate = rng.choice(ENTITY_RELATIONS)
                if target != label and (predicate, target) not in seen:
                    seen.add((predicate, target))
                    facts.append((predicate, target, True))
            facts.append(("instanceOf", rng.choice(CLASS_NAMES), False))
            if rng.random() < 0.5:
                facts.append(("color", rng.choice(COLORS), False))
            if rng.random() < 0.3:
                facts.append(("size", f"{rng.randint(1, 999)} units", False))
            edges[label] = tuple(facts)
        return cls(seed=seed, entities=entities, edges=edges, hallucination_rate=hallucination_rate)

    @classmethod
    def from_graph(
        cls, seed: int, edges: dict[str, list[Fact]], hallucination_rate: float = 0.0
    ) -> "SyntheticWorld":
        """Hand-built world: entity universe = subjects plus entity objects."""
        universe: dict[str, None] = {}
        for subject, facts in edges.items():
            universe.setdefault(subject, None)
            for _, obj, is_entity in facts:
                if is_entity:
                    universe.setdefault(obj, None)
        return cls(
            seed=seed,
            entities=list(universe),
            edges={label: tuple(facts) for label, facts in edges.items()},
            hallucination_rate=hallucination_rate,
        )

    def facts_for(self, label: str) -> tuple[Fact, ...]:
        return self.edges.get(label, ())

    def hallucinated_facts_for(self, label: str) -> tuple[Fact, ...]:
        """Extra fabricated pairs, sized so they make up ~rate of the output."""
        if self.hallucination_rate <= 0:
            return ()
        true_count = len(self.facts_for(label))
        if true_count == 0:
            return ()
        rng = _sub_rng(self.seed, "hallucinate", label)
        quota = true_count * self.hallucination_rate / (1.0 - self.hallucination_rate)
        count = int(quota) + (1 if rng.random() < quota - int(quota) else 0)
        return tuple(
            (rng.choice(ENTITY_RELATIONS), f"Phantom {label}x{i}", False) for i in range(count)
        )

    def corpus_documents(self) -> dict[str, str]:
        """One document per entity, one sentence per ground-truth fact."""
        docs = {}
        for label, facts in self.edges.items():
            lines = [f"{label} {pred} {obj}." for pred, obj, _ in facts]
            docs[f"{label}.txt"] = "\n".join(lines) + "\n"
        return docs


class SyntheticElicitation(ElicitationClient):
    """Replays the world's ground-truth out-edges, plus optional hallucinations."""

    prompt_hash = "synthetic-ground-truth-v1"

    def __init__(self, world: SyntheticWorld):
        self.world = world

    def elicit(self, entity: EntityId) -> ElicitationResult:
        facts = self.world.facts_for(entity.label) + self.world.hallucinated_facts_for(entity.label)
        pairs = [(pred, obj) for pred, obj, _ in facts]
        raw = json.dumps([{"predicate": p, "object": o} for p, o in pairs])
        return ElicitationResult(
            subject=entity,
            pairs=pairs,
            raw_response=raw,
            prompt_tokens=20 + len(entity.label),
            completion_tokens=2 + 8 * len(pairs),
            empty=not pairs,
        )


class SyntheticNer(NerClient):
    """An object string is an entity iff the world knows it as one."""

    def __init__(self, world: SyntheticWorld):
        self.world = world

    def extract(self, candidates: list[str]) -> list[str]:
        return [normalize_label(c) for c in candidates if normalize_label(c) in self.world.entity_set]
