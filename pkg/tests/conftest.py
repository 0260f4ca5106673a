import random

import pytest

from kbforge.model import ENTITY, LITERAL
from kbforge.oracles import (
    OracleConfig,
    OracleSuite,
    SyntheticElicitation,
    SyntheticNer,
    SyntheticWorld,
)
from kbforge.store import TripleStore


@pytest.fixture(scope="session")
def world42():
    return SyntheticWorld.generate(seed=42, n_entities=500)


@pytest.fixture()
def suite42(world42):
    return OracleSuite(
        elicitation=SyntheticElicitation(world42),
        ner=SyntheticNer(world42),
        config=OracleConfig(prompt_cost_micro=2, completion_cost_micro=8),
    )


def make_suite(world, prompt_cost=2, completion_cost=8, audit=None):
    from kbforge.oracles import AuditLog

    return OracleSuite(
        elicitation=SyntheticElicitation(world),
        ner=SyntheticNer(world),
        config=OracleConfig(prompt_cost_micro=prompt_cost, completion_cost_micro=completion_cost),
        audit=audit or AuditLog(None),
    )


@pytest.fixture()
def spouse_store():
    """Seven spouse edges, two mutual pairs."""
    store = TripleStore()
    store.bulk_load_rows(
        [
            ("A", "spouse", ENTITY, "B"),
            ("B", "spouse", ENTITY, "A"),
            ("C", "spouse", ENTITY, "D"),
            ("D", "spouse", ENTITY, "C"),
            ("E", "spouse", ENTITY, "F"),
            ("G", "spouse", ENTITY, "H"),
            ("I", "spouse", ENTITY, "J"),
        ]
    )
    return store


@pytest.fixture(scope="session")
def eval_store():
    """Medium fixture with selective predicates for evaluator cross-checks."""
    rng = random.Random(20240301)
    store = TripleStore()
    entities = [f"N{i}" for i in range(120)]
    literals = [f"value {i}" for i in range(40)] + ["red", "blue", "green"]
    predicates = [f"rel{i}" for i in range(12)] + ["spouse", "nationality", "gender", "instanceOf"]
    rows = set()
    for _ in range(2500):
        p = rng.choice(predicates)
        s = rng.choice(entities)
        if rng.random() < 0.6:
            rows.add((s, p, ENTITY, rng.choice(entities)))
        else:
            rows.add((s, p, LITERAL, rng.choice(literals)))
    store.bulk_load_rows(sorted(rows))
    return store


def rows_of(state):
    store = TripleStore()
    store.bulk_load_rows(state.triples)
    return store
