import random

import pytest

from kbforge.model import ENTITY, LITERAL, TermValue, triple
from kbforge.store import (
    MalformedTriple,
    TriplePattern,
    TripleStore,
    load_jsonl,
    read_jsonl_rows,
    write_jsonl,
)


def small_store():
    store = TripleStore()
    store.bulk_load_rows(
        [
            ("Suzhou", "instanceOf", ENTITY, "city"),
            ("Hangzhou", "instanceOf", ENTITY, "city"),
            ("Suzhou Metro", "instanceOf", LITERAL, "rapid transit system"),
            ("Suzhou Metro", "operatesIn", ENTITY, "Suzhou"),
            ("Suzhou Metro", "length", LITERAL, "1,276 km"),
            ("Suzhou", "locatedIn", ENTITY, "China"),
        ]
    )
    return store


def test_insert_is_set_semantics():
    store = TripleStore()
    t = triple("Suzhou", "instanceOf", TermValue.entity("city"))
    assert store.insert(t) is True
    assert store.insert(t) is False
    assert len(store) == 1
    assert t in store


def test_insert_rejects_non_triples():
    with pytest.raises(MalformedTriple):
        TripleStore().insert(("s", "p", "o"))


def test_bulk_load_counts_distinct(eval_store):
    rng = random.Random(3)
    base = [(f"S{i}", "p", LITERAL, f"o{i}") for i in range(900)]
    rows = base + [rng.choice(base) for _ in range(100)]
    rng.shuffle(rows)
    store = TripleStore()
    assert store.bulk_load_rows(rows) == 900
    assert len(store) == 900


def test_match_shapes_against_full_scan():
    store = small_store()
    everything = list(store.match())
    assert len(everything) == 6
    rng = random.Random(11)
    subjects = [t.subject.label for t in everything] + [None]
    predicates = [t.predicate for t in everything] + [None]
    objects = [t.object for t in everything] + [None]
    for _ in range(200):
        pattern = TriplePattern(
            subject=rng.choice(subjects),
            predicate=rng.choice(predicates),
            object=rng.choice(objects),
        )
        expected = {
            t
            for t in everything
            if (pattern.subject is None or t.subject.label == pattern.subject)
            and (pattern.predicate is None or t.predicate == pattern.predicate)
            and (pattern.object is None or t.object == pattern.object)
        }
        got = list(store.match(pattern))
        assert set(got) == expected
        assert store.count(pattern) == len(expected)
        assert got == list(store.match(pattern))  # deterministic order


def test_match_example_instanceof_city():
    store = small_store()
    rows = list(store.match(TriplePattern(predicate="instanceOf", object=TermValue.entity("city"))))
    assert {t.subject.label for t in rows} == {"Suzhou", "Hangzhou"}
    bound = TriplePattern("Suzhou", "locatedIn", TermValue.entity("China"))
    assert len(list(store.match(bound))) == 1
    assert list(store.match(TriplePattern(subject="NoSuch"))) == []


def test_insert_after_freeze_rebuilds():
    store = small_store()
    assert store.count(TriplePattern(predicate="instanceOf")) == 3
    store.insert(triple("Wuxi", "instanceOf", TermValue.entity("city")))
    assert store.count(TriplePattern(predicate="instanceOf")) == 4
    assert store.has_entity("Wuxi")


def test_counts_caches():
    store = small_store()
    assert store.predicate_counts["instanceOf"] == 3
    assert store.class_counts == {"city": 2, "rapid transit system": 1}


def test_entity_universe():
    store = small_store()
    labels = store.entity_labels()
    assert "China" in labels  # object-only entity
    assert "rapid transit system" not in labels  # literal
    assert labels == sorted(labels, key=lambda l: (l.lower(), l))
    assert store.has_entity("Suzhou Metro")
    assert not store.has_entity("rapid transit system")


def test_search_ranking_and_paging():
    store = small_store()
    total, hits = store.search_entities("suzhou")
    assert total == 2
    assert hits == ["Suzhou", "Suzhou Metro"]
    total, hits = store.search_entities("Suzhou", limit=1)
    assert total == 2 and hits == ["Suzhou"]
    assert store.search_entities("zzz") == (0, [])
    with pytest.raises(ValueError):
        store.search_entities("   ")


def test_search_exact_beats_prefix_beats_length():
    store = TripleStore()
    store.bulk_load_rows(
        [
            ("Anne", "p", LITERAL, "x"),
            ("Anne Frank", "p", LITERAL, "x"),
            ("Marianne", "p", LITERAL, "x"),
            ("Anne-Marie of Denmark", "p", LITERAL, "x"),
        ]
    )
    _, hits = store.search_entities("anne")
    assert hits == ["Anne", "Anne Frank", "Anne-Marie of Denmark", "Marianne"]


def test_jsonl_round_trip(tmp_path):
    store = small_store()
    path = tmp_path / "triples.jsonl"
    assert write_jsonl(path, store.iter_triples()) == 6
    assert path.read_text().startswith("# kbforge-triples v1\n")
    again = load_jsonl(path)
    assert again.triples_snapshot() == store.triples_snapshot()


def test_jsonl_rejects_malformed(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"s": "A", "p": "x"}\n')
    with pytest.raises(MalformedTriple):
        list(read_jsonl_rows(path))


def test_bulk_load_rows_validates():
    store = TripleStore()
    with pytest.raises(MalformedTriple):
        store.bulk_load_rows([("A", "p", "weird", "o")])
    with pytest.raises(MalformedTriple):
        store.bulk_load_rows([("", "p", ENTITY, "o")])


def test_literal_and_entity_objects_are_distinct():
    store = TripleStore()
    store.bulk_load_rows(
        [("A", "p", ENTITY, "city"), ("A", "p", LITERAL, "city")]
    )
    assert len(store) == 2
    assert store.count(TriplePattern(object=TermValue.entity("city"))) == 1
    assert store.count(TriplePattern(object=TermValue.literal("city"))) == 1
