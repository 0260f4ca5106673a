"""HTTP JSON API: entity pages, keyword search, the query endpoint with
its timeout window, and compare-run browsing.

The store is loaded once and shared read-only across requests; every
endpoint is idempotent and carries an explicit Cache-Control header. The
UI is a separate static bundle the service can optionally mount at /ui.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .compare import CompareRun, UnknownEntity, UnknownModel, diff_view
from .model import ENTITY, TermValue, decode_entity_iri, encode_entity_iri
from .query import (
    QuerySyntaxError,
    QueryTimeout,
    UnsupportedFeature,
    evaluate,
    parse_query,
)
from .store import TripleStore, load_store

MAX_QUERY_BYTES = 64 * 1024


@dataclass
class ServiceConfig:
    store_path: str = ""
    host: str = "127.0.0.1"
    port: int = 8100
    timeout_seconds: float = 100.0
    max_results: int = 100
    compare_dir: str | None = None
    ui_dir: str | None = None
    request_log: str | None = None
    memory_budget_bytes: int = 1 << 30

    def __post_init__(self) -> None:
        if self.timeout_seconds <= 0:
            raise ValueError("timeout must be positive")


def load_compare_runs(directory: str | Path) -> dict[str, CompareRun]:
    runs = {}
    for file in sorted(Path(directory).glob("*.json")):
        runs[file.stem] = CompareRun.load(file)
    return runs


def create_app(
    store: TripleStore,
    config: ServiceConfig | None = None,
    compare_runs: dict[str, CompareRun] | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    compare_runs = compare_runs or {}
    app = FastAPI(title="kbforge", version="0.1.0", description="Knowledge base browsing and query API")

    log_path = Path(config.request_log) if config.request_log else None

    @app.middleware("http")
    async def _headers_and_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        elapsed_ms = int((time.monotonic() - started) * 1000)
        response.headers.setdefault("Cache-Control", "public, max-age=60")
        if log_path:
            record = {
                "method": request.method,
                "path": request.url.path,
                "status": response.status_code,
                "elapsed_ms": elapsed_ms,
            }
            with log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")
        return response

    def _suggestions(query: str, limit: int = 5) -> list[dict]:
        try:
            _, labels = store.search_entities(query, limit)
        except ValueError:
            labels = []
        return [{"label": label, "iri_local": encode_entity_iri(label)} for label in labels]

    @app.get("/entity/{iri_local}")
    def entity_page(iri_local: str) -> Response:
        try:
            label = decode_entity_iri(iri_local)
        except (ValueError, UnicodeDecodeError):
            return JSONResponse(status_code=404, content={"error": "undecodable entity name", "suggestions": []})
        if not store.has_entity(label):
            return JSONResponse(
                status_code=404,
                content={"error": f"unknown entity: {label}", "suggestions": _suggestions(label)},
            )
        from .store import TriplePattern

        statements = []
        layer: str | None = None
        parents: list[str] = []
        for t in store.match(TriplePattern(subject=label)):
            statements.append({"p": t.predicate, "o": t.object.text, "o_kind": t.object.kind})
            if t.predicate == "bfsLayer":
                layer = t.object.text
            elif t.predicate == "bfsParent":
                parents.append(t.object.text)
        statements.sort(key=lambda s: (s["p"] in ("bfsLayer", "bfsParent"), s["p"], s["o_kind"], s["o"]))
        body: dict = {
            "label": label,
            "iri_local": encode_entity_iri(label),
            "statements": statements,
            "incoming_count": store.count(TriplePattern(object=TermValue(ENTITY, label))),
        }
        if layer is not None:
            body["bfsLayer"] = layer
        if parents:
            body["bfsParents"] = sorted(parents)
        return JSONResponse(content=body)

    @app.get("/search")
    def search(q: str = "", limit: int = 20) -> Response:
        if not q.strip():
            return JSONResponse(status_code=400, content={"error": "empty query"})
        limit = max(1, min(limit, config.max_results))
        total, labels = store.search_entities(q, limit)
        return JSONResponse(
            content={
                "total": total,
                "results": [
                    {"label": label, "iri_local": encode_entity_iri(label)} for label in labels
                ],
            }
        )

    def _run_query(text: str) -> Response:
        if len(text.encode("utf-8")) > MAX_QUERY_BYTES:
            return JSONResponse(status_code=413, content={"error": "query text exceeds 64 KiB"})
        if not text.strip():
            return JSONResponse(status_code=400, content={"error": "empty query"})
        try:
            plan = parse_query(text)
        except UnsupportedFeature as exc:
            return JSONResponse(
                status_code=400,
                content={"error": str(exc), "type": "unsupported", "line": exc.line, "col": exc.col},
            )
        except QuerySyntaxError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": str(exc), "type": "syntax", "line": exc.line, "col": exc.col},
            )
        started = time.monotonic()
        try:
            table = evaluate(
                plan,
                store,
                timeout_seconds=config.timeout_seconds,
                memory_budget_bytes=config.memory_budget_bytes,
            )
        except QueryTimeout as exc:
            elapsed_ms = int((time.monotonic() - started) * 1000)
            return JSONResponse(
                status_code=408,
                content={"error": str(exc), "elapsed_ms": elapsed_ms, "timeout_seconds": config.timeout_seconds},
            )
        elapsed_ms = int((time.monotonic() - started) * 1000)
        body = table.to_sparql_json()
        body["elapsed_ms"] = elapsed_ms
        return JSONResponse(content=body)

    @app.get("/query")
    def query_get(query: str = "") -> Response:
        return _run_query(query)

    @app.post("/query")
    async def query_post(request: Request) -> Response:
        raw = await request.body()
        if len(raw) > MAX_QUERY_BYTES:
            return JSONResponse(status_code=413, content={"error": "query text exceeds 64 KiB"})
        return _run_query(raw.decode("utf-8", errors="replace"))

    @app.get("/compare/runs")
    def compare_runs_index() -> Response:
        return JSONResponse(
            content={
                "runs": [
                    {"name": name, "models": run.models, "entities": run.entities}
                    for name, run in sorted(compare_runs.items())
                ]
            }
        )

    @app.get("/compare/{run_name}/{model_a}/{model_b}/{entity_iri}")
    def compare_cell(run_name: str, model_a: str, model_b: str, entity_iri: str) -> Response:
        run = compare_runs.get(run_name)
        if run is None:
            return JSONResponse(status_code=404, content={"error": f"unknown run: {run_name}"})
        try:
            entity = decode_entity_iri(entity_iri)
            view = diff_view(run, model_a, model_b, entity)
        except (UnknownModel, UnknownEntity, ValueError, UnicodeDecodeError) as exc:
            return JSONResponse(status_code=404, content={"error": f"not in run: {exc}"})
        return JSONResponse(content=view)

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def create_app_from_config(config: ServiceConfig) -> FastAPI:
    store = load_store(config.store_path)
    runs = load_compare_runs(config.compare_dir) if config.compare_dir else {}
    return create_app(store, config, runs)


def export_openapi(app: FastAPI) -> dict:
    return app.openapi()
