"""Recursive BFS knowledge elicitation.

Workers pull entities off a shared FIFO frontier, ask the elicitation
oracle for (predicate, object) pairs, partition objects into entity
references and literals via NER, and enqueue newly seen entities one
layer down. Claiming an entity (frontier pop + visited insert) is a
single atomic step under the state lock, so no entity is elicited twice;
oracle calls run outside the lock. Transient oracle failures re-enqueue
the entity up to three times before quarantining it.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .model import ENTITY, LITERAL, EmptyLabel, EntityId, normalize_label
from .oracles.base import OracleSuite, OracleUnreachable

CHECKPOINT_VERSION = 1

Row = tuple[str, str, str, str]


class CorruptCheckpoint(ValueError):
    pass


class ConfigMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CrawlConfig:
    seed: str
    max_entities: int = 1_000_000
    max_layers: int = 1_000_000
    per_entity_cap: int = 500
    budget_micro: int | None = None
    workers: int = 1
    checkpoint_interval: int = 0
    checkpoint_path: str | None = None

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        if self.max_entities <= 0 or self.max_layers < 0 or self.per_entity_cap <= 0:
            raise ValueError("caps must be positive")

    def semantic_hash(self) -> str:
        """Hash of the fields that shape the crawl's content.

        Worker count, checkpoint cadence, and the pure stop bounds
        (entity budget, spend budget) are operational knobs: a resumed
        crawl may raise them without invalidating the checkpoint. The
        seed, layer horizon, and per-entity cap change what gets stored,
        so altering them is a mismatch.
        """
        payload = json.dumps(
            {
                "seed": self.seed,
                "max_layers": self.max_layers,
                "per_entity_cap": self.per_entity_cap,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class CrawlState:
    def __init__(self, seed: str):
        self.frontier: deque[tuple[str, int]] = deque([(seed, 0)])
        self.frontier_set: set[str] = {seed}
        self.visited: set[str] = set()
        self.in_progress: dict[str, int] = {}
        self.triples: list[Row] = []
        self.triple_keys: set[Row] = set()
        self.discovery_edges: set[tuple[str, str]] = set()
        self.layers: dict[str, int] = {seed: 0}
        self.spent_micro = 0
        self.completed = 0
        self.per_entity_counts: dict[str, int] = {}
        self.dropped: dict[str, int] = {}
        self.retries: dict[str, int] = {}
        self.quarantined: dict[str, str] = {}
        self.overflow: set[tuple[str, int]] = set()
        self.stop_reason: str | None = None

    def snapshot_dict(self, config: CrawlConfig) -> dict:
        """Checkpoint view: in-flight entities go back to the frontier head."""
        head = sorted(self.in_progress.items())
        frontier = head + [item for item in self.frontier]
        return {
            "version": CHECKPOINT_VERSION,
            "config_hash": config.semantic_hash(),
            "frontier": [[label, layer] for label, layer in frontier],
            "visited": sorted(self.visited - set(self.in_progress)),
            "triples": [list(row) for row in self.triples],
            "discovery_edges": sorted(self.discovery_edges),
            "layers": self.layers,
            "spent_micro": self.spent_micro,
            "completed": self.completed,
            "per_entity_counts": self.per_entity_counts,
            "dropped": self.dropped,
            "retries": self.retries,
            "quarantined": self.quarantined,
            "overflow": sorted(self.overflow),
            "stop_reason": self.stop_reason,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CrawlState":
        try:
            if data["version"] != CHECKPOINT_VERSION:
                raise CorruptCheckpoint(f"unsupported checkpoint version {data['version']!r}")
            state = cls.__new__(cls)
            state.frontier = deque((label, int(layer)) for label, layer in data["frontier"])
            state.frontier_set = {label for label, _ in state.frontier}
            state.visited = set(data["visited"])
            state.in_progress = {}
            state.triples = [tuple(row) for row in data["triples"]]
            state.triple_keys = set(state.triples)
            state.discovery_edges = {tuple(e) for e in data["discovery_edges"]}
            state.layers = {k: int(v) for k, v in data["layers"].items()}
            state.spent_micro = int(data["spent_micro"])
            state.completed = int(data["completed"])
            state.per_entity_counts = {k: int(v) for k, v in data["per_entity_counts"].items()}
            state.dropped = {k: int(v) for k, v in data["dropped"].items()}
            state.retries = {k: int(v) for k, v in data["retries"].items()}
            state.quarantined = dict(data["quarantined"])
            state.overflow = {(label, int(layer)) for label, layer in data["overflow"]}
            state.stop_reason = data["stop_reason"]
            return state
        except CorruptCheckpoint:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptCheckpoint(f"malformed checkpoint: {exc}") from None


def write_checkpoint(state: CrawlState, config: CrawlConfig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(state.snapshot_dict(config), ensure_ascii=False), encoding="utf-8")
    os.replace(tmp, path)


def resume(path: str | Path, config: CrawlConfig) -> CrawlState:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"cannot read checkpoint {path}: {exc}") from None
    if not isinstance(data, dict):
        raise CorruptCheckpoint("checkpoint is not an object")
    if data.get("config_hash") != config.semantic_hash():
        raise ConfigMismatch("checkpoint was written under a different crawl configuration")
    return CrawlState.from_dict(data)


class _Engine:
    def __init__(self, config: CrawlConfig, suite: OracleSuite, state: CrawlState):
        self.config = config
        self.suite = suite
        self.state = state
        self.lock = threading.Lock()
        self.wake = threading.Condition(self.lock)

    # ---- claim / commit -------------------------------------------------

    def _bound_fired(self) -> str | None:
        if len(self.state.visited) >= self.config.max_entities:
            return "max_entities"
        budget = self.config.budget_micro
        if budget is not None and self.state.spent_micro >= budget:
            return "budget"
        return None

    def claim(self) -> tuple[str, int] | None:
        with self.wake:
            while True:
                if self.state.stop_reason:
                    return None
                reason = self._bound_fired()
                if reason:
                    self.state.stop_reason = reason
                    self.wake.notify_all()
                    return None
                if self.state.frontier:
                    label, layer = self.state.frontier.popleft()
                    self.state.frontier_set.discard(label)
                    self.state.visited.add(label)
                    self.state.in_progress[label] = layer
                    return (label, layer)
                if self.state.in_progress:
                    self.wake.wait()
                    continue
                return None

    def fail(self, label: str, layer: int, error: Exception) -> None:
        with self.wake:
            self.state.in_progress.pop(label, None)
            self.state.visited.discard(label)
            attempts = self.state.retries.get(label, 0) + 1
            self.state.retries[label] = attempts
            if attempts > 3:
                self.state.quarantined[label] = str(error)
            else:
                self.state.frontier.append((label, layer))
                self.state.frontier_set.add(label)
            self.wake.notify_all()

    def commit(
        self,
        label: str,
        layer: int,
        rows: list[Row],
        entity_objects: list[str],
        dropped: int,
        cost_micro: int,
    ) -> None:
        state = self.state
        with self.wake:
            stored = 0
            for row in rows:
                if row not in state.triple_keys:
                    state.triple_keys.add(row)
                    state.triples.append(row)
                    stored += 1
            state.per_entity_counts[label] = stored
            if dropped:
                state.dropped[label] = dropped
            for child in entity_objects:
                state.discovery_edges.add((label, child))
                if child in state.visited or child in state.frontier_set:
                    continue
                child_layer = layer + 1
                if child_layer > self.config.max_layers:
                    state.overflow.add((child, child_layer))
                    continue
                state.frontier.append((child, child_layer))
                state.frontier_set.add(child)
                state.layers[child] = child_layer
            state.in_progress.pop(label, None)
            state.completed += 1
            state.spent_micro += cost_micro
            if (
                self.config.checkpoint_interval > 0
                and self.config.checkpoint_path
                and state.completed % self.config.checkpoint_interval == 0
            ):
                write_checkpoint(state, self.config, self.config.checkpoint_path)
            self.wake.notify_all()

    # ---- per-entity pipeline --------------------------------------------

    def process(self, label: str, layer: int) -> None:
        entity = EntityId(label)
        try:
            result = self.suite.elicitation.elicit(entity)
        except OracleUnreachable as exc:
            self.fail(label, layer, exc)
            return
        pairs: list[tuple[str, str]] = []
        for pred_raw, obj_raw in result.pairs:
            try:
                pairs.append((normalize_label(pred_raw), normalize_label(obj_raw)))
            except EmptyLabel:
                continue
        dropped = max(0, len(pairs) - self.config.per_entity_cap)
        kept = pairs[: self.config.per_entity_cap]
        unique_objects = list(dict.fromkeys(obj for _, obj in kept))
        try:
            entity_objects = set(self.suite.ner.extract(unique_objects))
        except OracleUnreachable as exc:
            self.fail(label, layer, exc)
            return
        rows = [
            (label, pred, ENTITY if obj in entity_objects else LITERAL, obj)
            for pred, obj in dict.fromkeys(kept)
        ]
        ordered_children = [obj for obj in unique_objects if obj in entity_objects]
        cost = self.suite.config.call_cost_micro(result.prompt_tokens, result.completion_tokens)
        self.suite.ledger.record(self.suite.config, result.prompt_tokens, result.completion_tokens)
        self.suite.audit.record(label, result.prompt_tokens, result.completion_tokens, len(kept))
        self.commit(label, layer, rows, ordered_children, dropped, cost)

    def worker(self) -> None:
        while True:
            item = self.claim()
            if item is None:
                return
            self.process(*item)


def run_crawl(config: CrawlConfig, suite: OracleSuite, state: CrawlState | None = None) -> CrawlState:
    """Run (or continue) a crawl to a terminal state.

    Terminal means the frontier drained or a budget/entity bound fired;
    the state records which.
    """
    if state is None:
        state = CrawlState(normalize_label(config.seed))
    state.stop_reason = None  # a resumed run re-evaluates its own bounds
    engine = _Engine(config, suite, state)
    if config.workers == 1:
        engine.worker()
    else:
        threads = [
            threading.Thread(target=engine.worker, name=f"crawl-{i}", daemon=True)
            for i in range(config.workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if config.checkpoint_path:
        write_checkpoint(state, config, config.checkpoint_path)
    return state


def write_skew_report(state: CrawlState, path: str | Path) -> None:
    report = {
        "per_entity_counts": state.per_entity_counts,
        "dropped": state.dropped,
        "quarantined": state.quarantined,
        "overflow": sorted(state.overflow),
        "completed": state.completed,
        "spent_micro": state.spent_micro,
        "stop_reason": state.stop_reason,
    }
    Path(path).write_text(json.dumps(report, indent=2, ensure_ascii=False), encoding="utf-8")
