import pytest

from kbforge.compare import (
    CompareRun,
    UnknownEntity,
    UnknownModel,
    default_entity_fixture,
    diff_view,
    run_compare,
)
from kbforge.model import EntityId
from kbforge.oracles import ElicitationClient, OracleUnreachable, SyntheticElicitation, SyntheticNer, SyntheticWorld
from kbforge.oracles.base import ElicitationResult
from kbforge.verify import LocalCorpus, RuleBasedJudge


def make_world(rate=0.0):
    return SyntheticWorld.generate(seed=31, n_entities=120, hallucination_rate=rate)


def fixture_backend(world):
    return LocalCorpus(world.corpus_documents())


def test_identical_oracles_produce_identical_cells():
    world = make_world()
    models = [("a", SyntheticElicitation(world)), ("b", SyntheticElicitation(world))]
    run = run_compare(models, world.entities[:10], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())
    for entity in run.entities:
        assert run.cells[("a", entity)] == run.cells[("b", entity)]
    assert run.totals["a"] == run.totals["b"]
    assert run.prompt_hash == "synthetic-ground-truth-v1"


def test_ground_truth_model_verifies_true():
    world = make_world()
    models = [("a", SyntheticElicitation(world)), ("b", SyntheticElicitation(world))]
    run = run_compare(models, world.entities[:10], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())
    assert run.totals["a"]["False"] == 0
    assert run.totals["a"]["True"] == run.totals["a"]["triples"]


def test_hallucinating_model_false_rate_near_target():
    truth = make_world()
    liar = make_world(rate=0.2)
    models = [("truth", SyntheticElicitation(truth)), ("liar", SyntheticElicitation(liar))]
    run = run_compare(models, truth.entities, SyntheticNer(truth), fixture_backend(truth), RuleBasedJudge())
    totals = run.totals["liar"]
    false_rate = totals["False"] / totals["triples"]
    assert 0.15 < false_rate < 0.25
    assert run.totals["truth"]["False"] == 0


def test_totals_equal_verdict_sums():
    world = make_world()
    models = [("a", SyntheticElicitation(world)), ("b", SyntheticElicitation(world))]
    run = run_compare(models, world.entities[:15], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())
    for model in run.models:
        cells = [run.cells[(model, e)] for e in run.entities]
        assert run.totals[model]["triples"] == sum(len(c) for c in cells)
        for label in ("True", "Plausible", "False"):
            assert run.totals[model][label] == sum(
                1 for c in cells for t in c if t["verdict"] == label
            )


def test_prompt_hash_mismatch_rejected():
    world = make_world()

    class OtherPrompt(SyntheticElicitation):
        prompt_hash = "different-template"

    with pytest.raises(ValueError, match="prompt"):
        run_compare(
            [("a", SyntheticElicitation(world)), ("b", OtherPrompt(world))],
            world.entities[:2],
            SyntheticNer(world),
            fixture_backend(world),
            RuleBasedJudge(),
        )


def test_input_validation():
    world = make_world()
    single = [("a", SyntheticElicitation(world))]
    with pytest.raises(ValueError):
        run_compare(single, ["E0"], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())
    with pytest.raises(ValueError):
        run_compare(single * 2, [], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())


class BrokenClient(ElicitationClient):
    prompt_hash = "synthetic-ground-truth-v1"

    def elicit(self, entity: EntityId) -> ElicitationResult:
        raise OracleUnreachable("no service")


def test_oracle_failures_leave_missing_cells():
    world = make_world()
    models = [("ok", SyntheticElicitation(world)), ("broken", BrokenClient())]
    run = run_compare(models, world.entities[:3], SyntheticNer(world), fixture_backend(world), RuleBasedJudge())
    assert ("broken", world.entities[0]) not in run.cells
    assert len(run.failures) == 3
    assert run.totals["broken"]["triples"] == 0


def sample_run():
    cells = {
        ("A", "Ilya Sutskever"): [
            {"p": "instanceOf", "o": "human", "o_kind": "literal", "verdict": "True"},
            {"p": "bornIn", "o": "Nizhny Novgorod", "o_kind": "entity", "verdict": "True"},
            {"p": "field", "o": "deep learning", "o_kind": "literal", "verdict": "True"},
        ],
        ("B", "Ilya Sutskever"): [
            {"p": "instanceOf", "o": "Q5", "o_kind": "literal", "verdict": "Plausible"},
            {"p": "bornIn", "o": "Nizhny Novgorod", "o_kind": "entity", "verdict": "True"},
        ],
        ("A", "Empty"): [
            {"p": "instanceOf", "o": "x", "o_kind": "literal", "verdict": "False"}
        ],
        ("B", "Empty"): [],
    }
    return CompareRun(
        models=["A", "B"],
        prompt_hash="h",
        entities=["Ilya Sutskever", "Empty"],
        cells=cells,
        totals={
            "A": {"triples": 4, "True": 3, "Plausible": 0, "False": 1},
            "B": {"triples": 2, "True": 1, "Plausible": 1, "False": 0},
        },
    )


def test_diff_alignment():
    view = diff_view(sample_run(), "A", "B", "Ilya Sutskever")
    rows = {(r["predicate"], r["object_a"], r["object_b"]) for r in view["rows"]}
    assert ("instanceOf", "human", "Q5") in rows  # aligned by predicate, objects differ
    assert ("bornIn", "Nizhny Novgorod", "Nizhny Novgorod") in rows  # exact match
    assert ("field", "deep learning", None) in rows  # one-sided
    assert view["totals"]["A"]["triples"] == 4


def test_diff_row_conservation_and_mirror():
    run = sample_run()
    view_ab = diff_view(run, "A", "B", "Ilya Sutskever")
    a_cells = sum(1 for r in view_ab["rows"] if r["object_a"] is not None)
    b_cells = sum(1 for r in view_ab["rows"] if r["object_b"] is not None)
    assert a_cells == len(run.cells[("A", "Ilya Sutskever")])
    assert b_cells == len(run.cells[("B", "Ilya Sutskever")])
    view_ba = diff_view(run, "B", "A", "Ilya Sutskever")
    mirrored = {
        (r["predicate"], r["object_b"], r["verdict_b"], r["object_a"], r["verdict_a"])
        for r in view_ba["rows"]
    }
    original = {
        (r["predicate"], r["object_a"], r["verdict_a"], r["object_b"], r["verdict_b"])
        for r in view_ab["rows"]
    }
    assert mirrored == original


def test_diff_self_comparison_fully_matched():
    run = sample_run()
    view = diff_view(run, "A", "A", "Ilya Sutskever")
    assert all(r["object_a"] == r["object_b"] for r in view["rows"])


def test_diff_one_sided_for_empty_model():
    view = diff_view(sample_run(), "A", "B", "Empty")
    assert view["rows"] == [
        {
            "predicate": "instanceOf",
            "object_a": "x",
            "o_kind_a": "literal",
            "verdict_a": "False",
            "object_b": None,
            "o_kind_b": None,
            "verdict_b": None,
        }
    ]


def test_diff_unknown_inputs():
    run = sample_run()
    with pytest.raises(UnknownModel):
        diff_view(run, "A", "Z", "Empty")
    with pytest.raises(UnknownEntity):
        diff_view(run, "A", "B", "Atlantis")


def test_artifact_round_trip(tmp_path):
    run = sample_run()
    path = tmp_path / "run.json"
    run.save(path)
    again = CompareRun.load(path)
    assert again.cells == run.cells
    assert again.totals == run.totals
    assert again.models == run.models


def test_default_fixture_has_100_entities():
    entities = default_entity_fixture()
    assert len(entities) == 100
    assert "Vannevar Bush" in entities and "Ilya Sutskever" in entities
