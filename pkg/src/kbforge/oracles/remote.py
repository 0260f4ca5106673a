"""Remote HTTP oracle clients with schema-validated structured output.

The wire format is a chat-completions style JSON POST; the response body
must carry a JSON object matching a fixed schema. Strict mode retries and
then fails on violations; repair mode keeps the valid rows and drops the
rest. Endpoint, model and key come from the environment unless given.
"""

from __future__ import annotations

import hashlib
import json
import os
from importlib import resources

import httpx
import jsonschema
import numpy as np

from ..model import EntityId
from .base import (
    AuditLog,
    CostLedger,
    ElicitationClient,
    ElicitationResult,
    EmbeddingClient,
    NerClient,
    OracleConfig,
    OracleUnreachable,
    RateLimiter,
    SchemaViolation,
)

ENV_ENDPOINT = "KBFORGE_ORACLE_ENDPOINT"
ENV_MODEL = "KBFORGE_ORACLE_MODEL"
ENV_API_KEY = "KBFORGE_ORACLE_API_KEY"

ELICIT_SCHEMA = {
    "type": "object",
    "properties": {
        "pairs": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "predicate": {"type": "string", "minLength": 1},
                    "object": {"type": "string", "minLength": 1},
                },
                "required": ["predicate", "object"],
                "additionalProperties": False,
            },
        }
    },
    "required": ["pairs"],
    "additionalProperties": False,
}

NER_SCHEMA = {
    "type": "object",
    "properties": {"entities": {"type": "array", "items": {"type": "string"}}},
    "required": ["entities"],
    "additionalProperties": False,
}

_ROW_VALIDATOR = jsonschema.Draft202012Validator(ELICIT_SCHEMA["properties"]["pairs"]["items"])


def config_from_env(**overrides) -> OracleConfig:
    fields = {
        "endpoint": os.environ.get(ENV_ENDPOINT, ""),
        "model": os.environ.get(ENV_MODEL, ""),
    }
    fields.update(overrides)
    return OracleConfig(**fields)


def load_prompt(name: str) -> str:
    return resources.files("kbforge").joinpath("prompts").joinpath(name).read_text(encoding="utf-8")


class RemoteClientBase:
    def __init__(
        self,
        config: OracleConfig,
        http: httpx.Client | None = None,
        ledger: CostLedger | None = None,
        audit: AuditLog | None = None,
    ):
        if not config.endpoint:
            raise ValueError(f"no oracle endpoint configured (set {ENV_ENDPOINT})")
        self.config = config
        self.ledger = ledger or CostLedger()
        self.audit = audit or AuditLog(None)
        self.limiter = RateLimiter(config.requests_per_second)
        headers = {}
        key = os.environ.get(ENV_API_KEY)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._http = http or httpx.Client(timeout=config.timeout_seconds, headers=headers)

    def _post_chat(self, prompt: str, schema: dict, schema_name: str) -> tuple[dict, int, int, str]:
        """POST the prompt, return (parsed body, prompt tokens, completion tokens, raw)."""
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": schema_name, "schema": schema, "strict": True},
            },
        }
        last_error: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            self.limiter.acquire()
            try:
                response = self._http.post(self.config.endpoint, json=body)
                response.raise_for_status()
                payload = response.json()
            except (httpx.HTTPError, json.JSONDecodeError) as exc:
                last_error = exc
                continue
            usage = payload.get("usage", {})
            prompt_tokens = int(usage.get("prompt_tokens", 0))
            completion_tokens = int(usage.get("completion_tokens", 0))
            self.ledger.record(self.config, prompt_tokens, completion_tokens)
            raw = payload["choices"][0]["message"]["content"]
            try:
                parsed = json.loads(raw)
                jsonschema.validate(parsed, schema)
            except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
                if self.config.schema_mode == "repair":
                    return self._repair(raw), prompt_tokens, completion_tokens, raw
                last_error = SchemaViolation(str(exc))
                continue
            return parsed, prompt_tokens, completion_tokens, raw
        if isinstance(last_error, SchemaViolation):
            raise last_error
        raise OracleUnreachable(f"oracle call failed after retries: {last_error}")

    def _repair(self, raw: str) -> dict:
        raise SchemaViolation("response unparseable and repair not supported here")


class RemoteElicitation(RemoteClientBase, ElicitationClient):
    def __init__(self, config: OracleConfig, prompt_template: str | None = None, **kwargs):
        super().__init__(config, **kwargs)
        self.template = prompt_template if prompt_template is not None else load_prompt("elicit.txt")
        self.prompt_hash = hashlib.sha256(self.template.encode("utf-8")).hexdigest()

    def _repair(self, raw: str) -> dict:
        """Keep schema-valid rows, drop the rest."""
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError:
            return {"pairs": []}
        rows = parsed.get("pairs", []) if isinstance(parsed, dict) else parsed
        if not isinstance(rows, list):
            return {"pairs": []}
        return {"pairs": [row for row in rows if not list(_ROW_VALIDATOR.iter_errors(row))]}

    def elicit(self, entity: EntityId) -> ElicitationResult:
        prompt = self.template.format(entity=entity.label)
        parsed, prompt_tokens, completion_tokens, raw = self._post_chat(
            prompt, ELICIT_SCHEMA, "triple_pairs"
        )
        pairs = [(row["predicate"], row["object"]) for row in parsed["pairs"]]
        self.audit.record(entity.label, prompt_tokens, completion_tokens, len(pairs))
        return ElicitationResult(
            subject=entity,
            pairs=pairs,
            raw_response=raw,
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            empty=not pairs,
        )


class RemoteNer(RemoteClientBase, NerClient):
    def __init__(self, config: OracleConfig, prompt_template: str | None = None, **kwargs):
        super().__init__(config, **kwargs)
        self.template = prompt_template if prompt_template is not None else load_prompt("ner.txt")

    def _repair(self, raw: str) -> dict:
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError:
            return {"entities": []}
        items = parsed.get("entities", []) if isinstance(parsed, dict) else parsed
        if not isinstance(items, list):
            return {"entities": []}
        return {"entities": [item for item in items if isinstance(item, str)]}

    def extract(self, candidates: list[str]) -> list[str]:
        if not candidates:
            return []
        prompt = self.template.format(candidates=json.dumps(candidates, ensure_ascii=False))
        parsed, _, _, _ = self._post_chat(prompt, NER_SCHEMA, "named_entities")
        allowed = set(candidates)
        # the oracle may not invent entities: output stays a subset of the input
        return [c for c in candidates if c in set(parsed["entities"]) & allowed]


class RemoteEmbedder(EmbeddingClient):
    """POSTs {model, input} and expects {data: [{embedding: [...]}, ...]}."""

    def __init__(self, config: OracleConfig, http: httpx.Client | None = None):
        if not config.endpoint:
            raise ValueError(f"no embedding endpoint configured (set {ENV_ENDPOINT})")
        self.config = config
        self.limiter = RateLimiter(config.requests_per_second)
        self._http = http or httpx.Client(timeout=config.timeout_seconds)

    def embed_batch(self, labels: list[str]) -> np.ndarray:
        if not labels:
            return np.zeros((0, 0), dtype=np.float32)
        last_error: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            self.limiter.acquire()
            try:
                response = self._http.post(
                    self.config.endpoint, json={"model": self.config.model, "input": labels}
                )
                response.raise_for_status()
                rows = [item["embedding"] for item in response.json()["data"]]
            except (httpx.HTTPError, KeyError, json.JSONDecodeError) as exc:
                last_error = exc
                continue
            vectors = np.asarray(rows, dtype=np.float32)
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            return vectors / norms
        raise OracleUnreachable(f"embedding call failed after retries: {last_error}")

    def embed(self, label: str) -> np.ndarray:
        return self.embed_batch([label])[0]
