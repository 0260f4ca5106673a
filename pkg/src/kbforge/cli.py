"""Command-line interface for the crawl/consolidate/annotate/serve pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import click

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import bfsmeta as meta_mod
from . import crawl as crawl_mod
from . import stats as stats_mod
from .compare import default_entity_fixture, run_compare
from .consolidate import consolidate_rows
from .model import normalize_label
from .oracles import (
    AuditLog,
    CostLedger,
    OracleConfig,
    OracleSuite,
    RuleBasedNer,
    SyntheticElicitation,
    SyntheticNer,
    SyntheticWorld,
    TrigramEmbedder,
)
from .query import QueryError, evaluate, explain, parse_query
from .store import TripleStore, load_store, read_jsonl_rows, write_jsonl
from .turtle import serialize_turtle
from .verify import (
    LocalCorpus,
    RuleBasedJudge,
    agreement_table,
    aggregate_precision,
    read_manual_csv,
    sample_triples,
    verify_batch,
)


def _parse_kv_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected KEY = VALUE")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _micro(value: str) -> int:
    return round(float(value) * 1_000_000)


def _build_suite(cfg: dict[str, str], out_dir: Path) -> OracleSuite:
    kind = cfg.get("oracle", "synthetic")
    oracle_config = OracleConfig(
        endpoint=cfg.get("endpoint", ""),
        model=cfg.get("model", ""),
        prompt_cost_micro=_micro(cfg.get("prompt_cost", "0")),
        completion_cost_micro=_micro(cfg.get("completion_cost", "0")),
        requests_per_second=float(cfg.get("rps", "0")),
        schema_mode=cfg.get("schema_mode", "strict"),
    )
    audit = AuditLog(out_dir / "audit.jsonl")
    if kind == "synthetic":
        world = SyntheticWorld.generate(
            seed=int(cfg.get("world_seed", "42")),
            n_entities=int(cfg.get("world_entities", "500")),
            hallucination_rate=float(cfg.get("hallucination_rate", "0")),
        )
        return OracleSuite(
            elicitation=SyntheticElicitation(world),
            ner=SyntheticNer(world),
            config=oracle_config,
            ledger=CostLedger(),
            audit=audit,
        )
    if kind == "remote":
        from .oracles.remote import RemoteElicitation, RemoteNer

        ledger = CostLedger()
        return OracleSuite(
            elicitation=RemoteElicitation(oracle_config, ledger=ledger, audit=audit),
            ner=RemoteNer(oracle_config, ledger=ledger),
            config=oracle_config,
            ledger=ledger,
            audit=audit,
        )
    raise click.ClickException(f"unknown oracle kind: {kind!r}")


@click.group()
def main() -> None:
    """Materialize, consolidate, annotate, query and serve a knowledge base."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--resume", "resume_path", type=click.Path(exists=True))
@click.option("--out-dir", default="crawl-out", type=click.Path())
def crawl(config_path: str, resume_path: str | None, out_dir: str) -> None:
    """Run the recursive elicitation crawl described by a key-value config file."""
    cfg = _parse_kv_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = crawl_mod.CrawlConfig(
        seed=normalize_label(cfg["seed"]),
        max_entities=int(cfg.get("max_entities", "1000000")),
        max_layers=int(cfg.get("max_layers", "1000000")),
        per_entity_cap=int(cfg.get("per_entity_cap", "500")),
        budget_micro=_micro(cfg["budget"]) if "budget" in cfg else None,
        workers=int(cfg.get("workers", "1")),
        checkpoint_interval=int(cfg.get("checkpoint_interval", "0")),
        checkpoint_path=str(out / "checkpoint.json"),
    )
    suite = _build_suite(cfg, out)
    state = crawl_mod.resume(resume_path, config) if resume_path else None
    state = crawl_mod.run_crawl(config, suite, state)
    store = TripleStore()
    store.bulk_load_rows(state.triples)
    write_jsonl(out / "triples.jsonl", store.iter_triples())
    meta_mod.write_edges(out / "edges.jsonl", sorted(state.discovery_edges))
    crawl_mod.write_skew_report(state, out / "skew.json")
    click.echo(
        f"crawl finished: {state.completed} entities, {len(state.triples)} triples, "
        f"spent {state.spent_micro / 1e6:.4f} ({state.stop_reason or 'frontier drained'})"
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--threshold", default=0.90, show_default=True)
@click.option("--report", "report_path", type=click.Path())
def consolidate(in_path: str, out_path: str, threshold: float, report_path: str | None) -> None:
    """Canonicalize relation and class labels by embedding similarity."""
    rows = list(read_jsonl_rows(in_path))
    rewritten, report, _, _ = consolidate_rows(rows, threshold, TrigramEmbedder())
    store = TripleStore()
    store.bulk_load_rows(rewritten)
    write_jsonl(out_path, store.iter_triples())
    if report_path:
        Path(report_path).write_text(report.to_json(), encoding="utf-8")
    click.echo(
        f"relations {report.relations_before} -> {report.relations_after}, "
        f"classes {report.classes_before} -> {report.classes_after}, "
        f"duplicates removed {report.duplicates_removed}"
    )


@main.command("bfsmeta")
@click.option("--triples", "triples_path", required=True, type=click.Path(exists=True))
@click.option("--edges", "edges_path", type=click.Path(exists=True))
@click.option("--seed", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option(
    "--edges-from-triples",
    is_flag=True,
    help="Derive edges from entity-object statements instead of a discovery-edge file.",
)
def bfsmeta_cmd(triples_path: str, edges_path: str | None, seed: str, out_path: str, edges_from_triples: bool) -> None:
    """Recompute shortest-path layers and parents; write meta triples."""
    rows = list(read_jsonl_rows(triples_path))
    if edges_from_triples:
        edges = list(meta_mod.edges_from_triples(rows))
    elif edges_path:
        edges = list(meta_mod.read_edges(edges_path))
    else:
        raise click.ClickException("provide --edges or --edges-from-triples")
    overlay = meta_mod.compute_bfs_meta(edges, normalize_label(seed))
    triples = meta_mod.materialize_meta(overlay)
    write_jsonl(out_path, triples)
    if overlay.unreachable:
        click.echo(f"warning: {len(overlay.unreachable)} unreachable entities", err=True)
    click.echo(f"{len(overlay.layers)} entities annotated, {len(triples)} meta triples")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--reference", "reference_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
def stats(store_path: str, reference_path: str | None, out_path: str | None) -> None:
    """Compute the statistics block for a store."""
    store = load_store(store_path)
    reference = stats_mod.load_reference_labels(reference_path) if reference_path else None
    result = stats_mod.compute_stats(store, reference_labels=reference)
    text = result.to_json()
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    click.echo(text)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
@click.option("--timeout", default=100.0, show_default=True)
def analyses(store_path: str, out_path: str | None, timeout: float) -> None:
    """Run the five canned analyses and report their tables."""
    store = load_store(store_path)
    report = stats_mod.run_canned_analyses(store, timeout_seconds=timeout)
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    for entry in report:
        click.echo(f"== {entry['name']}")
        if "error" in entry:
            click.echo(f"error: {entry['error']}")
        else:
            click.echo("  ".join(entry["columns"]))
            for row in entry["rows"][:10]:
                click.echo("  ".join(row))


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--file", "query_path", type=click.Path(exists=True))
@click.option("--timeout", default=100.0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit SPARQL-JSON instead of a table.")
@click.option("--show-plan", is_flag=True, help="Print the evaluation plan instead of running.")
@click.argument("query_text", required=False)
def query(store_path: str, query_path: str | None, timeout: float, as_json: bool, show_plan: bool, query_text: str | None) -> None:
    """Evaluate a query from --file or the command line."""
    if not query_path and not query_text:
        raise click.ClickException("provide --file or an inline query")
    text = Path(query_path).read_text(encoding="utf-8") if query_path else (query_text or "")
    store = load_store(store_path)
    try:
        plan = parse_query(text)
        if show_plan:
            click.echo(explain(plan, store))
            return
        table = evaluate(plan, store, timeout_seconds=timeout)
    except QueryError as exc:
        raise click.ClickException(str(exc)) from None
    if as_json:
        click.echo(json.dumps(table.to_sparql_json(), indent=2, ensure_ascii=False))
    else:
        click.echo(table.to_text())
        click.echo(f"({len(table.rows)} rows)")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--sample", "sample_size", default=1000, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--mode", type=click.Choice(["triple", "subject"]), default="triple", show_default=True)
@click.option("--manual", "manual_csv", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path())
def verify(store_path, corpus_dir, sample_size, seed, mode, manual_csv, out_path) -> None:
    """Sample triples and verify them against a local document corpus."""
    store = load_store(store_path)
    triples = sample_triples(store, sample_size, seed)
    backend = LocalCorpus.from_dir(corpus_dir)
    judge = RuleBasedJudge(mode=mode)
    verdicts, deferred = verify_batch(triples, backend, judge)
    report = aggregate_precision(verdicts, seed=seed)
    payload = report.to_dict()
    if deferred:
        payload["deferred"] = len(deferred)
    if manual_csv:
        manual = aggregate_precision(read_manual_csv(manual_csv, mode=mode))
        payload["agreement"] = agreement_table(report, manual)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    click.echo(text)


@main.command()
@click.option("--models", "models_path", required=True, type=click.Path(exists=True))
@click.option("--entities", "entities_path", type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def compare(models_path: str, entities_path: str | None, corpus_dir: str | None, out_path: str) -> None:
    """Elicit a fixed entity set from several models and verify each triple."""
    spec = tomllib.loads(Path(models_path).read_text(encoding="utf-8"))
    models = []
    ner = None
    corpus_docs: dict[str, str] = {}
    for entry in spec.get("model", []):
        name = entry["name"]
        if entry.get("kind", "synthetic") == "synthetic":
            world = SyntheticWorld.generate(
                seed=int(entry.get("world_seed", 42)),
                n_entities=int(entry.get("world_entities", 300)),
                hallucination_rate=float(entry.get("hallucination_rate", 0)),
            )
            models.append((name, SyntheticElicitation(world)))
            if ner is None:
                ner = SyntheticNer(world)
                corpus_docs = world.corpus_documents()
        else:
            from .oracles.remote import RemoteElicitation

            config = OracleConfig(
                endpoint=entry.get("endpoint", ""),
                model=entry.get("model", ""),
                prompt_cost_micro=round(float(entry.get("prompt_cost", 0)) * 1_000_000),
                completion_cost_micro=round(float(entry.get("completion_cost", 0)) * 1_000_000),
            )
            models.append((name, RemoteElicitation(config)))
    if ner is None:
        ner = RuleBasedNer()
    if entities_path:
        entities = [
            line.strip()
            for line in Path(entities_path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
    else:
        entities = default_entity_fixture()
    backend = LocalCorpus.from_dir(corpus_dir) if corpus_dir else LocalCorpus(corpus_docs)
    run = run_compare(models, entities, ner, backend, RuleBasedJudge())
    run.save(out_path)
    click.echo(json.dumps(run.totals, indent=2, sort_keys=True))


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8100, show_default=True)
@click.option("--timeout", default=100.0, show_default=True)
@click.option("--compare-runs", "compare_dir", type=click.Path(exists=True))
@click.option("--ui", "ui_dir", type=click.Path(exists=True))
@click.option("--request-log", type=click.Path())
def serve(store_path, host, port, timeout, compare_dir, ui_dir, request_log) -> None:
    """Serve the HTTP JSON API (and optionally the UI bundle)."""
    from .service import ServiceConfig, create_app_from_config

    config = ServiceConfig(
        store_path=store_path,
        host=host,
        port=port,
        timeout_seconds=timeout,
        compare_dir=compare_dir,
        ui_dir=ui_dir,
        request_log=request_log,
    )
    app = create_app_from_config(config)
    try:
        import uvicorn
    except ImportError:
        raise click.ClickException("uvicorn is required to serve (pip install uvicorn)") from None
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("export")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def export(store_path: str, out_path: str) -> None:
    """Convert a store between JSON-lines and Turtle by output suffix."""
    store = load_store(store_path)
    if out_path.endswith(".ttl"):
        Path(out_path).write_text(serialize_turtle(store), encoding="utf-8")
    else:
        write_jsonl(out_path, store.iter_triples())
    click.echo(f"wrote {len(store)} triples to {out_path}")


@main.command("export-openapi")
@click.option("--out", "out_path", required=True, type=click.Path())
def export_openapi_cmd(out_path: str) -> None:
    """Write the HTTP API description used by UI contract tests."""
    from .service import create_app, export_openapi

    app = create_app(TripleStore())
    Path(out_path).write_text(json.dumps(export_openapi(app), indent=2, sort_keys=True), encoding="utf-8")
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
