"""Regenerate the golden HTTP fixtures: python tests/make_golden.py"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

GOLDEN_DIR = Path(__file__).parent / "golden"

GENDER_QUERY = (
    "PREFIX gptkb: <https://gptkb.org/entity/>\n"
    "PREFIX gptkbp: <https://gptkb.org/prop/>\n"
    "SELECT ?o (COUNT(*) AS ?ofreq) WHERE { ?s gptkbp:gender ?o. } "
    "GROUP BY ?o ORDER BY DESC(?ofreq) LIMIT 100"
)

CASES = [
    ("entity_suzhou", "GET", "/entity/Suzhou", None),
    ("entity_suzhounese", "GET", "/entity/Suzhounese", None),
    ("entity_wu_chinese", "GET", "/entity/Wu_Chinese", None),
    ("entity_unknown", "GET", "/entity/Suzho", None),
    ("search_suzhou", "GET", "/search?q=suzhou&limit=10", None),
    ("search_page", "GET", "/search?q=suzhou&limit=1", None),
    ("query_gender", "POST", "/query", GENDER_QUERY),
    ("query_syntax_error", "POST", "/query", "SELECT ?s WHERE { ?s"),
    ("query_unsupported", "POST", "/query", "PREFIX gptkbp: <https://gptkb.org/prop/>\nSELECT ?s WHERE { ?s gptkbp:x ?o . FILTER(?o) }"),
    ("compare_runs", "GET", "/compare/runs", None),
    ("compare_diff", "GET", "/compare/demo/gpt-x/llama-y/Suzhou", None),
    ("compare_unknown_model", "GET", "/compare/demo/gpt-x/nope/Suzhou", None),
]


def normalize(payload: dict) -> dict:
    payload = dict(payload)
    payload.pop("elapsed_ms", None)
    return payload


def collect() -> dict[str, dict]:
    from service_fixture import fixture_app

    client = TestClient(fixture_app())
    out = {}
    for name, method, path, body in CASES:
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, content=body.encode("utf-8"))
        out[name] = {
            "status": response.status_code,
            "body": normalize(response.json()),
        }
    return out


def main() -> None:
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, payload in collect().items():
        path = GOLDEN_DIR / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    import sys

    sys.path.insert(0, str(Path(__file__).parent))
    main()
