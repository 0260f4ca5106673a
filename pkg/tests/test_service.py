import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from make_golden import CASES, GOLDEN_DIR, collect, normalize
from service_fixture import fixture_app, fixture_compare_run, fixture_store
from kbforge.model import ENTITY
from kbforge.service import ServiceConfig, create_app, export_openapi
from kbforge.store import TripleStore


@pytest.fixture(scope="module")
def client():
    return TestClient(fixture_app())


def test_responses_match_golden_files(client):
    observed = collect()
    for name, _, _, _ in CASES:
        golden_path = GOLDEN_DIR / f"{name}.json"
        assert golden_path.exists(), f"missing golden file {golden_path}; run tests/make_golden.py"
        golden = json.loads(golden_path.read_text())
        assert observed[name] == golden, f"response drifted for {name}"


def test_entity_page_counts(client):
    body = client.get("/entity/Suzhou").json()
    content = [s for s in body["statements"] if s["p"] not in ("bfsLayer", "bfsParent")]
    assert len(content) == 6
    assert sum(1 for s in content if s["o_kind"] == ENTITY) == 3
    assert body["bfsLayer"] == "3"
    # meta statements sort after content statements
    kinds = [s["p"] in ("bfsLayer", "bfsParent") for s in body["statements"]]
    assert kinds == sorted(kinds)


def test_entity_statement_count_matches_store(client):
    store = fixture_store()
    from kbforge.store import TriplePattern

    body = client.get("/entity/Suzhou").json()
    assert len(body["statements"]) == store.count(TriplePattern(subject="Suzhou"))


def test_seed_entity_has_layer_zero_no_parents(client):
    body = client.get("/entity/Vannevar_Bush").json()
    assert body["bfsLayer"] == "0"
    assert "bfsParents" not in body


def test_unknown_entity_404_with_suggestions(client):
    response = client.get("/entity/Suzho")
    assert response.status_code == 404
    suggestions = response.json()["suggestions"]
    assert suggestions and suggestions[0]["label"] == "Suzhou"
    assert client.get("/entity/%ZZ").status_code == 404


def test_search_contract(client):
    assert client.get("/search?q=").status_code == 400
    body = client.get("/search?q=suzhou&limit=1").json()
    assert body["total"] == 3 and len(body["results"]) == 1


def test_query_get_and_post_agree(client):
    text = "PREFIX gptkbp: <https://gptkb.org/prop/>\nSELECT (COUNT(*) AS ?n) WHERE { ?s gptkbp:gender ?o }"
    via_post = client.post("/query", content=text.encode())
    via_get = client.get("/query", params={"query": text})
    assert via_post.status_code == via_get.status_code == 200
    assert normalize(via_post.json()) == normalize(via_get.json())
    assert via_post.json()["results"]["bindings"][0]["n"]["value"] == "5"
    assert "elapsed_ms" in via_post.json()


def test_query_error_payloads(client):
    response = client.post("/query", content=b"SELECT ?s WHERE { ?s")
    assert response.status_code == 400
    body = response.json()
    assert body["type"] == "syntax" and body["line"] >= 1
    assert client.post("/query", content=b"").status_code == 400
    oversized = b"SELECT" + b" " * (64 * 1024 + 1)
    assert client.post("/query", content=oversized).status_code == 413


def test_query_timeout_returns_408_within_grace():
    store = TripleStore()
    store.bulk_load_rows(
        [(f"S{i}", "p", ENTITY, f"S{(i + 1) % 400}") for i in range(400)]
    )
    app = create_app(store, ServiceConfig(timeout_seconds=1.0))
    client = TestClient(app)
    bomb = (
        "PREFIX gptkbp: <https://gptkb.org/prop/>\n"
        "SELECT (COUNT(*) AS ?n) WHERE { ?a gptkbp:p ?b . ?c gptkbp:p ?d . ?e gptkbp:p ?f . ?g gptkbp:p ?h }"
    )
    started = time.monotonic()
    response = client.post("/query", content=bomb.encode())
    elapsed = time.monotonic() - started
    assert response.status_code == 408
    assert elapsed < 2.0
    assert response.json()["timeout_seconds"] == 1.0


def test_compare_endpoints(client):
    runs = client.get("/compare/runs").json()["runs"]
    assert runs[0]["name"] == "demo" and runs[0]["models"] == ["gpt-x", "llama-y"]
    diff = client.get("/compare/demo/gpt-x/llama-y/Suzhou").json()
    run = fixture_compare_run()
    assert diff["totals"]["gpt-x"] == run.totals["gpt-x"]
    a_cells = sum(1 for r in diff["rows"] if r["object_a"] is not None)
    assert a_cells == len(run.cells[("gpt-x", "Suzhou")])
    self_diff = client.get("/compare/demo/gpt-x/gpt-x/Suzhou").json()
    assert all(r["object_a"] == r["object_b"] for r in self_diff["rows"])
    assert client.get("/compare/nope/gpt-x/llama-y/Suzhou").status_code == 404
    assert client.get("/compare/demo/gpt-x/llama-y/Atlantis").status_code == 404


def test_cache_control_and_idempotence(client):
    response = client.get("/entity/Suzhou")
    assert "max-age" in response.headers["cache-control"]
    assert client.get("/entity/Suzhou").json() == response.json()


def test_request_log(tmp_path):
    log = tmp_path / "requests.jsonl"
    app = create_app(fixture_store(), ServiceConfig(timeout_seconds=5, request_log=str(log)))
    TestClient(app).get("/search?q=suzhou")
    entries = [json.loads(line) for line in log.read_text().splitlines()]
    assert entries[0]["path"] == "/search" and entries[0]["status"] == 200


def test_openapi_description_is_current(client):
    committed = Path(__file__).parent.parent / "docs" / "openapi.json"
    assert committed.exists(), "docs/openapi.json missing; run: kbforge export-openapi --out docs/openapi.json"
    generated = export_openapi(create_app(TripleStore()))
    assert json.loads(committed.read_text()) == generated
    paths = set(generated["paths"])
    assert {"/entity/{iri_local}", "/search", "/query", "/compare/runs"} <= paths
