"""Side-by-side model comparison on a fixed entity set.

Every model is elicited with the identical prompt (enforced by prompt
template hash), each returned triple is verified, and the run persists
as a versioned JSON artifact the diff view reads from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .model import ENTITY, LITERAL, EmptyLabel, EntityId, TermValue, Triple, normalize_label
from .oracles.base import ElicitationClient, NerClient, OracleUnreachable
from .verify import TRIPLE_LABELS, verify_triple

RUN_VERSION = 1


class UnknownModel(KeyError):
    pass


class UnknownEntity(KeyError):
    pass


@dataclass
class CompareRun:
    models: list[str]
    prompt_hash: str
    entities: list[str]
    cells: dict[tuple[str, str], list[dict]]  # (model, entity) -> [{p, o, o_kind, verdict}]
    totals: dict[str, dict[str, int]]
    failures: dict[str, str] = field(default_factory=dict)  # "model/entity" -> error

    def to_dict(self) -> dict:
        return {
            "version": RUN_VERSION,
            "models": self.models,
            "prompt_hash": self.prompt_hash,
            "entities": self.entities,
            "cells": [
                {"model": model, "entity": entity, "triples": triples}
                for (model, entity), triples in sorted(self.cells.items())
            ],
            "totals": self.totals,
            "failures": self.failures,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompareRun":
        if data.get("version") != RUN_VERSION:
            raise ValueError(f"unsupported compare-run version: {data.get('version')!r}")
        cells = {(c["model"], c["entity"]): c["triples"] for c in data["cells"]}
        return cls(
            models=list(data["models"]),
            prompt_hash=data["prompt_hash"],
            entities=list(data["entities"]),
            cells=cells,
            totals={m: dict(t) for m, t in data["totals"].items()},
            failures=dict(data.get("failures", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False, sort_keys=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "CompareRun":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_entity_fixture() -> list[str]:
    text = resources.files("kbforge").joinpath("fixtures").joinpath("compare_entities.txt").read_text(
        encoding="utf-8"
    )
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def _normalized_pairs(pairs: list[tuple[str, str]], cap: int) -> list[tuple[str, str]]:
    normalized = []
    for pred, obj in pairs:
        try:
            normalized.append((normalize_label(pred), normalize_label(obj)))
        except EmptyLabel:
            continue
    return list(dict.fromkeys(normalized[:cap]))


def run_compare(
    models: list[tuple[str, ElicitationClient]],
    entities: list[str],
    ner: NerClient,
    search_backend,
    judge,
    per_entity_cap: int = 500,
) -> CompareRun:
    """Elicit every (model, entity) cell once, verify each triple.

    All clients must share one prompt template hash; oracle failures
    leave the cell missing and the run continues.
    """
    if len(models) < 2:
        raise ValueError("need at least two models to compare")
    if not entities:
        raise ValueError("empty entity list")
    hashes = {client.prompt_hash for _, client in models}
    if len(hashes) != 1:
        raise ValueError(f"models use different prompt templates: {sorted(hashes)}")
    entities = [normalize_label(e) for e in entities]
    cells: dict[tuple[str, str], list[dict]] = {}
    totals: dict[str, dict[str, int]] = {
        name: {"triples": 0, **{label: 0 for label in TRIPLE_LABELS}} for name, _ in models
    }
    failures: dict[str, str] = {}
    for name, client in models:
        for entity in entities:
            try:
                result = client.elicit(EntityId(entity))
            except OracleUnreachable as exc:
                failures[f"{name}/{entity}"] = str(exc)
                continue
            pairs = _normalized_pairs(result.pairs, per_entity_cap)
            objects = list(dict.fromkeys(obj for _, obj in pairs))
            entity_objects = set(ner.extract(objects))
            triples = []
            for pred, obj in pairs:
                kind = ENTITY if obj in entity_objects else LITERAL
                verdict = verify_triple(
                    Triple(EntityId(entity), pred, TermValue(kind, obj)), search_backend, judge
                )
                triples.append({"p": pred, "o": obj, "o_kind": kind, "verdict": verdict.label})
                totals[name]["triples"] += 1
                totals[name][verdict.label] += 1
            cells[(name, entity)] = triples
    return CompareRun(
        models=[name for name, _ in models],
        prompt_hash=hashes.pop(),
        entities=entities,
        cells=cells,
        totals=totals,
        failures=failures,
    )


@dataclass
class DiffRow:
    predicate: str
    object_a: str | None = None
    o_kind_a: str | None = None
    verdict_a: str | None = None
    object_b: str | None = None
    o_kind_b: str | None = None
    verdict_b: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def diff_view(run: CompareRun, model_a: str, model_b: str, entity: str) -> dict:
    """Predicate-aligned rows plus per-model totals for one entity."""
    for model in (model_a, model_b):
        if model not in run.models:
            raise UnknownModel(model)
    if entity not in run.entities:
        raise UnknownEntity(entity)
    side_a = run.cells.get((model_a, entity), [])
    side_b = run.cells.get((model_b, entity), [])
    predicates = sorted({t["p"] for t in side_a} | {t["p"] for t in side_b})
    rows: list[DiffRow] = []
    for predicate in predicates:
        group_a = sorted(
            (t for t in side_a if t["p"] == predicate), key=lambda t: (t["o_kind"], t["o"])
        )
        group_b = sorted(
            (t for t in side_b if t["p"] == predicate), key=lambda t: (t["o_kind"], t["o"])
        )
        remaining_b = list(group_b)
        matched: list[tuple[dict, dict | None]] = []
        for ta in group_a:
            exact = next(
                (tb for tb in remaining_b if tb["o"] == ta["o"] and tb["o_kind"] == ta["o_kind"]),
                None,
            )
            if exact is not None:
                remaining_b.remove(exact)
            matched.append((ta, exact))
        # align leftovers pairwise in sorted order
        unmatched_a = [(ta, None) for ta, tb in matched if tb is None]
        paired = [(ta, tb) for ta, tb in matched if tb is not None]
        refill = []
        for (ta, _), tb in zip(unmatched_a, remaining_b):
            refill.append((ta, tb))
        refill_count = len(refill)
        only_a = [ta for ta, _ in unmatched_a[refill_count:]]
        only_b = remaining_b[refill_count:]
        ordered: list[tuple[dict | None, dict | None]] = (
            paired + refill + [(ta, None) for ta in only_a] + [(None, tb) for tb in only_b]
        )
        for ta, tb in ordered:
            rows.append(
                DiffRow(
                    predicate=predicate,
                    object_a=ta["o"] if ta else None,
                    o_kind_a=ta["o_kind"] if ta else None,
                    verdict_a=ta["verdict"] if ta else None,
                    object_b=tb["o"] if tb else None,
                    o_kind_b=tb["o_kind"] if tb else None,
                    verdict_b=tb["verdict"] if tb else None,
                )
            )
    return {
        "entity": entity,
        "model_a": model_a,
        "model_b": model_b,
        "totals": {model_a: run.totals[model_a], model_b: run.totals[model_b]},
        "rows": [r.to_dict() for r in rows],
    }
