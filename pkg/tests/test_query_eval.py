import random
import time

import pytest

from naive_eval import evaluate_naive, row_multiset
from query_gen import generate_query
from kbforge.model import ENTITY, LITERAL, TermValue
from kbforge.query import (
    QueryTimeout,
    ResourceExhausted,
    evaluate,
    explain,
    parse_query,
)
from kbforge.stats import canned_query_text
from kbforge.store import TripleStore

PROLOGUE = "PREFIX gptkb: <https://gptkb.org/entity/>\nPREFIX gptkbp: <https://gptkb.org/prop/>\n"


def run(text, store, timeout=20):
    return evaluate(parse_query(text), store, timeout_seconds=timeout)


def test_spouse_symmetry_fixture(spouse_store):
    table = run(canned_query_text("spouse_symmetry"), spouse_store)
    assert table.rows == [
        {"numMutual": 4, "total": 7, "fraction": pytest.approx(4 / 7, abs=1e-12)}
    ]


def test_eu_shape_distinct_collapses_double_nationality():
    store = TripleStore()
    store.bulk_load_rows(
        [
            ("P1", "nationality", ENTITY, "German"),
            ("P1", "nationality", ENTITY, "French"),
            ("P2", "nationality", ENTITY, "Italian"),
            ("P3", "nationality", ENTITY, "Swedish"),
            ("P4", "nationality", ENTITY, "Swiss"),
        ]
    )
    table = run(canned_query_text("eu_citizens"), store)
    assert table.rows == [{"count": 3}]


def test_empty_store_aggregate_yields_zero_row():
    table = run(PROLOGUE + "SELECT (COUNT(*) AS ?n) WHERE { ?s gptkbp:x ?o }", TripleStore())
    assert table.rows == [{"n": 0}]


def test_optional_leaves_unbound_cells():
    store = TripleStore()
    store.bulk_load_rows(
        [("A", "knows", ENTITY, "B"), ("B", "color", LITERAL, "red")]
    )
    table = run(
        PROLOGUE
        + "SELECT ?x ?c WHERE { ?a gptkbp:knows ?x . OPTIONAL { ?x gptkbp:color ?c } } ORDER BY ?x",
        store,
    )
    assert table.rows == [{"x": TermValue(ENTITY, "B"), "c": TermValue(LITERAL, "red")}]
    table = run(
        PROLOGUE
        + "SELECT ?a ?c WHERE { ?a gptkbp:knows ?x . OPTIONAL { ?x gptkbp:nosuch ?c } }",
        store,
    )
    assert table.rows == [{"a": TermValue(ENTITY, "A"), "c": None}]


def test_count_variants(eval_store):
    text = (
        PROLOGUE
        + "SELECT (COUNT(*) AS ?all) (COUNT(?b) AS ?bound) (COUNT(DISTINCT ?b) AS ?uniq) "
        + "WHERE { ?a gptkbp:rel0 ?x . OPTIONAL { ?x gptkbp:rel1 ?b } }"
    )
    row = run(text, eval_store).rows[0]
    assert row["bound"] <= row["all"]
    assert row["uniq"] <= row["bound"]


def test_arithmetic_projection():
    store = TripleStore()
    store.bulk_load_rows([("A", "p", LITERAL, "x"), ("B", "p", LITERAL, "y")])
    row = run(
        PROLOGUE + "SELECT ((COUNT(*) * 1.0) / 4 AS ?f) (COUNT(*) + 1 AS ?plus) WHERE { ?s gptkbp:p ?o }",
        store,
    ).rows[0]
    assert row["f"] == pytest.approx(0.5)
    assert row["plus"] == 3


def test_order_by_direction_and_tie_break():
    store = TripleStore()
    store.bulk_load_rows(
        [
            ("A", "score", LITERAL, "1"),
            ("B", "score", LITERAL, "1"),
            ("C", "score", LITERAL, "2"),
        ]
    )
    table = run(
        PROLOGUE + "SELECT ?s (COUNT(*) AS ?n) WHERE { ?s gptkbp:score ?o } GROUP BY ?s ORDER BY DESC(?n) LIMIT 10",
        store,
    )
    labels = [row["s"].text for row in table.rows]
    assert labels == ["A", "B", "C"]  # equal counts fall back to entity order


def test_distinct_projection():
    store = TripleStore()
    store.bulk_load_rows(
        [("A", "p", ENTITY, "X"), ("B", "p", ENTITY, "X"), ("C", "p", ENTITY, "Y")]
    )
    table = run(PROLOGUE + "SELECT DISTINCT ?o WHERE { ?s gptkbp:p ?o } ORDER BY ?o", store)
    assert [row["o"].text for row in table.rows] == ["X", "Y"]


def test_repeated_variable_in_pattern():
    store = TripleStore()
    store.bulk_load_rows([("A", "knows", ENTITY, "A"), ("A", "knows", ENTITY, "B")])
    table = run(PROLOGUE + "SELECT ?a WHERE { ?a gptkbp:knows ?a }", store)
    assert [row["a"].text for row in table.rows] == ["A"]


def test_predicate_variables():
    store = TripleStore()
    store.bulk_load_rows([("A", "p1", ENTITY, "B"), ("A", "p2", LITERAL, "x")])
    table = run(PROLOGUE + "SELECT ?p (COUNT(*) AS ?n) WHERE { ?s ?p ?o } GROUP BY ?p ORDER BY ?p", store)
    assert [row["p"].label for row in table.rows] == ["p1", "p2"]


def test_timeout_fires_within_grace():
    store = TripleStore()
    store.bulk_load_rows([(f"S{i}", "p", ENTITY, f"S{(i + 1) % 300}") for i in range(300)])
    bomb = PROLOGUE + (
        "SELECT (COUNT(*) AS ?n) WHERE { ?a gptkbp:p ?b . ?c gptkbp:p ?d . ?e gptkbp:p ?f . ?g gptkbp:p ?h }"
    )
    started = time.monotonic()
    with pytest.raises(QueryTimeout):
        evaluate(parse_query(bomb), store, timeout_seconds=0.5)
    assert time.monotonic() - started < 1.5


def test_memory_budget_aborts():
    store = TripleStore()
    store.bulk_load_rows([(f"S{i}", "p", ENTITY, f"S{(i + 1) % 200}") for i in range(200)])
    bomb = PROLOGUE + "SELECT (COUNT(*) AS ?n) WHERE { ?a gptkbp:p ?b . ?c gptkbp:p ?d . ?e gptkbp:p ?f }"
    with pytest.raises(ResourceExhausted):
        evaluate(parse_query(bomb), store, timeout_seconds=60, memory_budget_bytes=1 << 22)


def test_matches_naive_evaluator_on_random_queries(eval_store):
    rng = random.Random(4242)
    predicates = sorted(eval_store.predicate_counts)
    entities = eval_store.entity_labels()[:60]
    literals = [f"value {i}" for i in range(10)] + ["red", "blue"]
    checked = 0
    for _ in range(120):
        text = generate_query(rng, predicates, entities, literals)
        plan = parse_query(text)
        table = evaluate(plan, eval_store, timeout_seconds=30)
        expected = evaluate_naive(plan, eval_store)
        if plan.order_by:
            assert [tuple(r.get(c) for c in table.columns) for r in table.rows] == [
                tuple(r.get(c) for c in table.columns) for r in expected
            ], text
        else:
            assert row_multiset(table.columns, table.rows) == row_multiset(
                table.columns, expected
            ), text
        checked += 1
    assert checked == 120


def test_count_var_never_exceeds_count_star(eval_store):
    rng = random.Random(77)
    predicates = sorted(eval_store.predicate_counts)
    for _ in range(25):
        p1, p2 = rng.choice(predicates), rng.choice(predicates)
        text = (
            PROLOGUE
            + f"SELECT (COUNT(*) AS ?all) (COUNT(?c) AS ?som) WHERE {{ ?a gptkbp:{p1} ?b . "
            + f"OPTIONAL {{ ?b gptkbp:{p2} ?c }} }}"
        )
        row = run(text, eval_store).rows[0]
        assert row["som"] <= row["all"]


def test_symmetry_fraction_bounded_on_random_graphs():
    rng = random.Random(5150)
    for _ in range(10):
        store = TripleStore()
        n = rng.randint(2, 40)
        rows = {
            (f"P{rng.randrange(n)}", "spouse", ENTITY, f"P{rng.randrange(n)}")
            for _ in range(rng.randint(1, 80))
        }
        store.bulk_load_rows(sorted(rows))
        row = run(canned_query_text("spouse_symmetry"), store).rows[0]
        if row["total"]:
            assert 0.0 <= row["fraction"] <= 1.0
            assert row["numMutual"] <= row["total"]


def test_explain_output(eval_store):
    plan = parse_query(PROLOGUE + "SELECT ?s WHERE { ?s gptkbp:rel0 ?o }")
    text = explain(plan, eval_store)
    assert text.splitlines()[0].startswith("scan POS")
    plan = parse_query(canned_query_text("spouse_symmetry"))
    text = explain(plan, eval_store)
    assert "subquery" in text and "left join" in text
    assert text.splitlines()[1].startswith("  ")  # nested indentation


def test_explain_orders_by_selectivity():
    store = TripleStore()
    rows = [(f"S{i}", "common", LITERAL, "x") for i in range(50)]
    rows += [("S0", "rare", LITERAL, "y")]
    store.bulk_load_rows(rows)
    plan = parse_query(PROLOGUE + "SELECT ?a WHERE { ?a gptkbp:common ?b . ?a gptkbp:rare ?c }")
    lines = explain(plan, store).splitlines()
    assert "rare" in lines[0] and "common" in lines[1]
