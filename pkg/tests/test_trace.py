"""Lasso traces: canonical forms, literals, universes, zipping."""

import random
from math import lcm

import pytest

from ckltl import (
    KripkeStructure,
    LassoTrace,
    NotAPathOfModel,
    SizeLimitExceeded,
    TraceUniverse,
    add_trace,
    format_trace,
    generate_universe,
    is_model_trace,
    obs_divergence_point,
    parse_trace_literal,
    universe_of,
    zip3,
)

from gen import gen_system, gen_trace, gen_universe

P = frozenset({"p"})
Q = frozenset({"q"})
E = frozenset()


def tr(text):
    return parse_trace_literal(text)


def test_loop_must_be_nonempty():
    with pytest.raises(ValueError):
        LassoTrace((P,), ())


def test_label_at():
    t = LassoTrace((P, E), (Q, E))
    assert [t.label_at(i) for i in range(7)] == [P, E, Q, E, Q, E, Q]
    with pytest.raises(IndexError):
        t.label_at(-1)


def test_canonical_minimal_period():
    t = LassoTrace((), (P, Q, P, Q))
    assert t.canonical() == LassoTrace((), (P, Q))


def test_canonical_absorbs_trailing_prefix():
    # {p} ; {q} | {p} ; {q}  denotes the same word as  | {p} ; {q}
    t = LassoTrace((P, Q), (P, Q))
    assert t.canonical() == LassoTrace((), (P, Q))
    # absorption can rotate the loop
    t = LassoTrace((E, P), (Q, P))
    assert t.canonical() == LassoTrace((E,), (P, Q))


def test_same_word_is_presentation_invariant():
    r = random.Random(7)
    for _ in range(200):
        t = gen_trace(r)
        unrolled = LassoTrace(t.prefix + t.loop, t.loop)
        doubled = LassoTrace(t.prefix, t.loop + t.loop)
        assert t.same_word(unrolled)
        assert t.same_word(doubled)
        assert unrolled.same_word(doubled)
        # and the canonical form denotes the same pointwise labels
        c = t.canonical()
        for i in range(len(t.prefix) + 2 * len(t.loop) + 3):
            assert c.label_at(i) == t.label_at(i)


def test_trace_literal_roundtrip():
    fixed = ["| {}", "{p} | {q}", "{p,q} ; {} | {p} ; {q}", "| {p,q,s}"]
    for text in fixed:
        assert format_trace(tr(text)) == text
    r = random.Random(8)
    for _ in range(200):
        t = gen_trace(r)
        assert tr(format_trace(t)) == t


def test_trace_literal_rejects_garbage():
    for bad in ["{p}", "{p} |", "| p", "{p | {q}", "| {p};{q"]:
        with pytest.raises(ValueError):
            tr(bad)


def test_zip3_positional_oracle():
    names = ("pi", "pi1", "pi2")
    r = random.Random(9)
    for _ in range(100):
        t1, t2, t3 = gen_trace(r), gen_trace(r), gen_trace(r)
        z = zip3(t1, t2, t3, names)
        assert len(z.prefix) == max(len(t.prefix) for t in (t1, t2, t3))
        assert len(z.loop) == lcm(*(len(t.loop) for t in (t1, t2, t3)))
        for i in range(len(z.prefix) + 2 * len(z.loop)):
            want = frozenset(
                (p, name)
                for t, name in zip((t1, t2, t3), names)
                for p in t.label_at(i)
            )
            assert z.label_at(i) == want


def test_universe_rejects_duplicates_and_preserves_order():
    t1, t2 = tr("| {p}"), tr("| {q}")
    with pytest.raises(ValueError):
        TraceUniverse((t1, tr("{p} | {p}")))
    u = universe_of([t2, t1, tr("{q} | {q}")])  # third is t2 again
    assert u.traces == (t2.canonical(), t1.canonical())
    assert u.index(tr("{q};{q} | {q}")) == 0
    assert tr("| {p,q}") not in u


def test_obs_divergence_point_matches_brute_scan():
    r = random.Random(10)
    for _ in range(150):
        s = gen_system(r)
        agent = r.choice(s.agents)
        u = gen_universe(r)
        t1, t2 = r.choice(u.traces), r.choice(u.traces)
        got = obs_divergence_point(s, agent, t1, t2)
        obs = s.observation_of(agent)
        horizon = (
            max(len(t1.prefix), len(t2.prefix))
            + 2 * lcm(len(t1.loop), len(t2.loop))
        )
        brute = next(
            (
                j
                for j in range(horizon)
                if (t1.label_at(j) & obs) != (t2.label_at(j) & obs)
            ),
            None,
        )
        assert got == brute


def two_state_kripke():
    return KripkeStructure(
        states=("s0", "s1"),
        initial="s0",
        transitions={"s0": ("s0", "s1"), "s1": ("s0",)},
        aps=("p",),
        labels={"s0": frozenset(), "s1": frozenset({"p"})},
    )


def test_generate_universe_enumerates_exactly():
    k = two_state_kripke()
    u = generate_universe(k, max_prefix=1, max_loop=2)
    words = {format_trace(t) for t in u}
    # hand enumeration of initial lassos with |prefix|<=1, |loop|<=2,
    # up to denoted word:
    #   loop (s0)               -> | {}        (also reached via prefix s0)
    #   loop (s0 s1)            -> | {} ; {p}
    #   prefix s0, loop (s0 s1) -> {} | {} ; {p}
    #   prefix s0, loop (s1 s0) -> same word as | {} ; {p} (prefix absorbed)
    # a loop (s1) is impossible: s1 has no self edge
    assert words == {"| {}", "| {} ; {p}", "{} | {} ; {p}"}
    assert all(o == "model" for o in u.origins)
    assert "generated(" in u.provenance


def test_generate_universe_respects_transitions():
    k = two_state_kripke()
    for t in generate_universe(k, max_prefix=2, max_loop=2):
        assert is_model_trace(k, t)


def test_generate_universe_loop_states():
    k = two_state_kripke()
    u = generate_universe(k, max_prefix=2, max_loop=2, loop_states=("s0",))
    assert all(set(t.loop) <= {frozenset()} for t in u)
    with pytest.raises(ValueError):
        generate_universe(k, max_prefix=1, max_loop=1, loop_states=("zz",))


def test_generate_universe_size_cap_and_empty_warning():
    k = two_state_kripke()
    with pytest.raises(SizeLimitExceeded):
        generate_universe(k, max_prefix=3, max_loop=3, max_traces=2)
    with pytest.warns(UserWarning):
        u = generate_universe(k, max_prefix=0, max_loop=1, loop_states=("s1",))
    assert len(u) == 0


def test_is_model_trace():
    k = two_state_kripke()
    assert is_model_trace(k, tr("| {}"))
    assert is_model_trace(k, tr("{} ; {p} | {}"))
    assert not is_model_trace(k, tr("| {p}"))        # s1 has no self loop
    assert not is_model_trace(k, tr("{p} | {}"))     # initial state is s0
    assert not is_model_trace(k, tr("| {q}"))        # no such labeling


def test_is_model_trace_checks_all_presentations():
    # the canonical word matters, not the given split
    k = two_state_kripke()
    assert is_model_trace(k, tr("{} | {} ; {}"))


def test_add_trace():
    k = two_state_kripke()
    u = generate_universe(k, max_prefix=0, max_loop=1)
    grown = add_trace(u, tr("{} | {p} ; {}"))
    assert len(grown) == len(u) + 1
    again = add_trace(grown, tr("{} ; {p} | {} ; {p}"))
    assert len(again) == len(grown)  # same word, no-op
    with pytest.raises(NotAPathOfModel):
        from ckltl import System, subset_similarity

        s = System(
            kripke=k,
            agents=("a",),
            observation={"a": frozenset({"p"})},
            similarity={"a": subset_similarity(("p",))},
        )
        add_trace(u, tr("| {p}"), system=s)
