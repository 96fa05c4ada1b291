"""The hiring case study: structures, universes, observation, similarity."""

from pathlib import Path

import pytest

from ckltl import (
    EvalContext,
    eval_at,
    parse,
    system_to_dict,
    validate_similarity,
)
from ckltl.hiring import (
    AGENTS,
    APS,
    VARIANTS,
    build_explainable,
    build_gender_frozen,
    build_restricted,
    build_unexplainable,
    decision_label,
    decision_trace,
    export_fixtures,
    hiring_vocabulary,
    idle_trace,
    single_round_universe,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_variant_inventory():
    assert set(VARIANTS) == {
        "explainable",
        "unexplainable",
        "restricted",
        "gender-frozen",
    }
    for build in VARIANTS.values():
        assert build().validate() == []


def test_state_counts():
    assert len(build_explainable().kripke.states) == 37
    assert len(build_unexplainable().kripke.states) == 37
    assert len(build_gender_frozen().kripke.states) == 37
    assert len(build_restricted().kripke.states) == 25


def test_decision_labels():
    assert decision_label("it", "f", "sales", "f") == frozenset(
        {"a_it", "a_f", "r_sales", "r_f"}
    )
    assert decision_label("sales", "f", "sales", "f") == frozenset(
        {"a_sales", "a_f", "r_sales", "r_f", "offer"}
    )
    # gender mismatch alone blocks the offer
    assert "offer" not in decision_label("sales", "m", "sales", "f")


def test_offer_states_count():
    k = build_explainable().kripke
    offers = [s for s in k.states if "offer" in k.labels[s]]
    assert len(offers) == 6  # 3 jobs x 2 genders, both sides equal
    k = build_restricted().kripke
    offers = [s for s in k.states if "offer" in k.labels[s]]
    assert len(offers) == 4


def test_single_round_universe_layout():
    s = build_explainable()
    u = single_round_universe(s)
    assert len(u) == 37
    assert u.traces[0] == idle_trace()  # idle first, then decisions
    offer_traces = [t for t in u if "offer" in t.label_at(1)]
    assert len(offer_traces) == 6
    # every decision state appears exactly once at position 1
    seen = {t.label_at(1) for t in u.traces[1:]}
    assert len(seen) == 36
    # all traces are quiet from position 2 on
    assert all(t.label_at(2) == frozenset() for t in u)

    u = single_round_universe(build_restricted())
    assert len(u) == 25
    assert sum(1 for t in u if "offer" in t.label_at(1)) == 4


def test_decision_trace_membership():
    s = build_explainable()
    u = single_round_universe(s)
    t = decision_trace("it", "f", "sales", "f")
    assert t in u
    assert t.label_at(1) == decision_label("it", "f", "sales", "f")
    assert idle_trace() in u
    # restricted universe has no accounting applicants
    u_r = single_round_universe(build_restricted())
    assert decision_trace("accounting", "m", "accounting", "m") not in u_r


def test_observation_maps():
    full = build_explainable()
    limited = build_unexplainable()
    assert set(full.agents) == set(limited.agents) == set(AGENTS)
    for ag in AGENTS:
        assert full.observation_of(ag) == frozenset(APS)
    assert "r_sales" not in limited.observation_of("a")
    assert "a_sales" not in limited.observation_of("r")
    assert "offer" in limited.observation_of("a")
    assert "offer" in limited.observation_of("r")
    assert "a_sales" in limited.observation_of("a")


def test_observation_collapses_decisions_for_the_applicant():
    # under limited observation the applicant cannot split decisions that
    # agree on its own attributes and the outcome
    s = build_unexplainable()
    u = single_round_universe(s)
    ctx = EvalContext.exact(s, u)
    t1 = decision_trace("sales", "f", "it", "m")
    t2 = decision_trace("sales", "f", "accounting", "f")
    assert not eval_at(ctx, t1, 1, parse("K[a] r_it"))
    assert eval_at(ctx, t1, 1, parse("K[a] a_sales"))
    # with full observation the same knowledge is available
    s_full = build_explainable()
    ctx_full = EvalContext.exact(s_full, single_round_universe(s_full))
    assert eval_at(ctx_full, t1, 1, parse("K[a] r_it"))
    assert t2 in single_round_universe(s)


def test_similarity_is_a_preorder_with_reference_minimum():
    # spec invariant for both the plain and gender-frozen relations, checked
    # from a decision trace and from idle, at both single-round positions
    for build in (build_explainable, build_gender_frozen):
        s = build()
        u = single_round_universe(s)
        ctx = EvalContext.exact(s, u)
        for t_ref in (u.traces[0], decision_trace("sales", "f", "sales", "f")):
            for i in (0, 1):
                for ag in AGENTS:
                    report = validate_similarity(ctx, ag, t_ref, i)
                    assert report.ok, (ag, i, report.violations[:3])


def test_gender_freeze_blocks_gender_flips():
    s = build_gender_frozen()
    u = single_round_universe(s)
    ctx = EvalContext.exact(s, u)
    t = decision_trace("sales", "f", "sales", "f")
    flipped = decision_trace("sales", "m", "sales", "f")
    same = decision_trace("it", "f", "sales", "f")
    # accessibility viewed from t: gender flips are not comparable
    assert not ctx.similarity_holds("a", t, t, flipped, 1)
    assert ctx.similarity_holds("a", t, t, same, 1)
    # the recruiter keeps the plain relation
    assert ctx.similarity_holds("r", t, t, flipped, 1)
    # the plain-similarity variant accepts the flip for the applicant too
    s2 = build_explainable()
    ctx2 = EvalContext.exact(s2, single_round_universe(s2))
    assert ctx2.similarity_holds("a", t, t, flipped, 1)


def test_vocabulary_matches_every_variant():
    v = hiring_vocabulary()
    assert v.agents() == ("a", "r")
    assert v.outcome == "offer"
    assert len(v.literals_of("a")) == 10
    for build in VARIANTS.values():
        assert v.validate_for(build()) == []


def test_shipped_fixtures_are_in_sync(tmp_path):
    names = export_fixtures(tmp_path)
    assert names == [
        "explainable.json",
        "gender_frozen.json",
        "restricted.json",
        "unexplainable.json",
    ]
    for name in names:
        shipped = FIXTURES / name
        assert shipped.exists(), f"missing shipped fixture {name}"
        assert shipped.read_text() == (tmp_path / name).read_text(), (
            f"fixtures/{name} is stale; regenerate with export_fixtures()"
        )


def test_fixtures_load_back_to_the_builders():
    from ckltl import load_system

    for name, build in VARIANTS.items():
        fname = f"{name.replace('-', '_')}.json"
        loaded = load_system(FIXTURES / fname)
        assert system_to_dict(loaded) == system_to_dict(build())
