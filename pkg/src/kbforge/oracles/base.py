"""Oracle client interfaces and shared plumbing.

Three services feed the pipeline: triple elicitation, named-entity
recognition, and label embedding. Each has a remote HTTP implementation
and a deterministic local one, all behind the same small interfaces.
Costs accumulate in integer micro-currency so totals are exact.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..model import EntityId


class OracleUnreachable(RuntimeError):
    """Transport failure after exhausting retries."""


class SchemaViolation(ValueError):
    """Oracle response failed schema validation in strict mode."""


@dataclass(frozen=True)
class OracleConfig:
    endpoint: str = ""
    model: str = ""
    timeout_seconds: float = 60.0
    max_retries: int = 3
    schema_mode: str = "strict"  # or "repair"
    prompt_cost_micro: int = 0  # micro-currency per prompt token
    completion_cost_micro: int = 0  # micro-currency per completion token
    requests_per_second: float = 0.0  # 0 = unthrottled

    def __post_init__(self) -> None:
        if self.timeout_seconds <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("retries must be >= 0")
        if self.schema_mode not in ("strict", "repair"):
            raise ValueError(f"unknown schema mode: {self.schema_mode!r}")

    def call_cost_micro(self, prompt_tokens: int, completion_tokens: int) -> int:
        return prompt_tokens * self.prompt_cost_micro + completion_tokens * self.completion_cost_micro


@dataclass
class ElicitationResult:
    subject: EntityId
    pairs: list[tuple[str, str]]
    raw_response: str
    prompt_tokens: int
    completion_tokens: int
    empty: bool = False

    def cost_micro(self, config: OracleConfig) -> int:
        return config.call_cost_micro(self.prompt_tokens, self.completion_tokens)


class RateLimiter:
    """Token-bucket limiter; callers block until a slot frees up."""

    def __init__(self, requests_per_second: float, burst: int = 1):
        self.rate = requests_per_second
        self.capacity = max(1, burst)
        self._tokens = float(self.capacity)
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.rate <= 0:
            return
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class CostLedger:
    """Thread-safe exact cost accumulator (integer micro-currency)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.prompt_tokens = 0
        self.completion_tokens = 0
        self.spent_micro = 0
        self.calls = 0

    def record(self, config: OracleConfig, prompt_tokens: int, completion_tokens: int) -> int:
        cost = config.call_cost_micro(prompt_tokens, completion_tokens)
        with self._lock:
            self.prompt_tokens += prompt_tokens
            self.completion_tokens += completion_tokens
            self.spent_micro += cost
            self.calls += 1
        return cost


class AuditLog:
    """Append-only JSON-lines log, one record per oracle call."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def record(self, entity: str, prompt_tokens: int, completion_tokens: int, pairs: int) -> None:
        if not self.path:
            return
        row = {
            "entity": entity,
            "timestamp": time.time(),
            "prompt_tokens": prompt_tokens,
            "completion_tokens": completion_tokens,
            "pairs": pairs,
        }
        line = json.dumps(row, ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def entries(self) -> list[dict]:
        if not self.path or not self.path.exists():
            return []
        with self.path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


class ElicitationClient:
    """Interface: ask the oracle for (predicate, object) pairs about an entity."""

    prompt_hash: str = "unspecified"

    def elicit(self, entity: EntityId) -> ElicitationResult:
        raise NotImplementedError


class NerClient:
    """Interface: flag which candidate strings are crawlable named entities."""

    def extract(self, candidates: list[str]) -> list[str]:
        raise NotImplementedError


class EmbeddingClient:
    """Interface: map a normalized label to a unit-norm vector."""

    def embed(self, label: str) -> np.ndarray:
        raise NotImplementedError

    def embed_batch(self, labels: list[str]) -> np.ndarray:
        return np.stack([self.embed(label) for label in labels]) if labels else np.zeros((0, 0))


@dataclass
class OracleSuite:
    """The bundle the crawl engine consumes."""

    elicitation: ElicitationClient
    ner: NerClient
    config: OracleConfig = field(default_factory=OracleConfig)
    ledger: CostLedger = field(default_factory=CostLedger)
    audit: AuditLog = field(default_factory=lambda: AuditLog(None))
