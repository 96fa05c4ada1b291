"""Evaluation engine checks.

The heavy lifting is the dual-route comparison against tests/oracle.py: a
deliberately naive recursive evaluator with none of the engine's caching,
stabilization bounds, or operator fusion.  Any disagreement between the two
is a bug in one of them.
"""

import random

import pytest

from ckltl import (
    And,
    Atom,
    EMight,
    EvalContext,
    Eventually,
    Globally,
    Implies,
    Know,
    LassoTrace,
    Might,
    Not,
    Prev,
    StabilizationCapExceeded,
    System,
    UWould,
    Would,
    check_system,
    closest_antecedents,
    desugar,
    eval_at,
    explain,
    parse,
    parse_trace_literal,
    stabilize,
    subset_similarity,
    universe_of,
    validate_similarity,
)
from ckltl.model import KripkeStructure

from gen import gen_formula, gen_system, gen_temporal, gen_trace, gen_universe
from oracle import naive


def tr(text):
    return parse_trace_literal(text)


# ---------------------------------------------------------------------------
# dual routes


def test_bounded_engine_matches_naive_oracle():
    r = random.Random(100)
    for _ in range(250):
        s = gen_system(r)
        u = gen_universe(r)
        f = gen_formula(r, depth=r.randint(1, 4))
        n = r.randint(0, 6)
        i = r.randint(0, n)
        t = r.choice(u.traces)
        ctx = EvalContext.bounded(s, u, n)
        assert eval_at(ctx, t, i, f) == naive(s, u, n, t, f, i), (
            f"formula={f}, trace={t}, i={i}, n={n}"
        )


def test_exact_surface_matches_exact_desugared():
    r = random.Random(101)
    for _ in range(200):
        s = gen_system(r)
        u = gen_universe(r)
        f = gen_formula(r, depth=r.randint(1, 4))
        i = r.randint(0, 3)
        t = r.choice(u.traces)
        ctx = EvalContext.exact(s, u, stabilization_cap=256)
        assert eval_at(ctx, t, i, f) == eval_at(ctx, t, i, desugar(f))


def test_exact_value_is_presentation_invariant():
    r = random.Random(102)
    for _ in range(150):
        s = gen_system(r)
        u = gen_universe(r)
        f = gen_temporal(r, depth=r.randint(1, 4))
        t = r.choice(u.traces)
        i = r.randint(0, 2)
        ctx = EvalContext.exact(s, u, stabilization_cap=256)
        got = eval_at(ctx, t, i, f)
        # same word, different lasso split; fresh context so nothing is shared
        t2 = LassoTrace(t.prefix + t.loop, t.loop)
        u2 = universe_of(
            [t2 if x.same_word(t) else x for x in u.traces], u.provenance
        )
        ctx2 = EvalContext.exact(s, u2, stabilization_cap=256)
        assert eval_at(ctx2, t2, i, f) == got


def test_pure_past_agrees_between_modes():
    # past operators (and knowledge over them) only look left, so a bound
    # can never cut them off
    r = random.Random(103)
    for _ in range(150):
        s = gen_system(r)
        u = gen_universe(r)
        f = gen_formula(r, depth=3, future=False)
        n = r.randint(0, 5)
        i = r.randint(0, n)
        t = r.choice(u.traces)
        exact = EvalContext.exact(s, u, stabilization_cap=256)
        bounded = EvalContext.bounded(s, u, n)
        assert eval_at(exact, t, i, f) == eval_at(bounded, t, i, f)


def test_exact_globally_implies_bounded_globally():
    # with a bound-insensitive body, G over the truncated word is weaker
    # and F is stronger
    r = random.Random(104)
    for _ in range(150):
        s = gen_system(r)
        u = gen_universe(r)
        body = gen_formula(r, depth=2, future=False)
        t = r.choice(u.traces)
        n = r.randint(0, 5)
        exact = EvalContext.exact(s, u, stabilization_cap=256)
        bounded = EvalContext.bounded(s, u, n)
        g = Globally(body)
        if eval_at(exact, t, 0, g):
            assert eval_at(bounded, t, 0, g)
        f = Eventually(body)
        if eval_at(bounded, t, 0, f):
            assert eval_at(exact, t, 0, f)


# ---------------------------------------------------------------------------
# counterfactuals on a pinned universe


def cf_fixture():
    """Four one-letter lassos over {p, q}; one agent seeing everything."""
    k = KripkeStructure(
        states=("e", "sp", "sq", "spq"),
        initial="e",
        transitions={s: ("e", "sp", "sq", "spq") for s in ("e", "sp", "sq", "spq")},
        aps=("p", "q"),
        labels={
            "e": frozenset(),
            "sp": frozenset({"p"}),
            "sq": frozenset({"q"}),
            "spq": frozenset({"p", "q"}),
        },
    )
    s = System(
        kripke=k,
        agents=("a",),
        observation={"a": frozenset({"p", "q"})},
        similarity={"a": subset_similarity(("p", "q"))},
    )
    u = universe_of([tr("| {}"), tr("| {p}"), tr("| {q}"), tr("| {p,q}")])
    return s, u


def test_counterfactuals_on_pinned_universe():
    s, u = cf_fixture()
    ctx = EvalContext.exact(s, u)
    idle = u.traces[0]

    # From the idle trace, | {p} and | {q} are incomparable minimal
    # (p|q)-worlds under the subset ordering.  The existential reading lets
    # each threshold speak for itself, so both opposite WOULDs hold and both
    # MIGHTs fail; the universal variants do not have that artifact.
    assert eval_at(ctx, idle, 0, parse("(p | q) WOULD[a] p"))
    assert eval_at(ctx, idle, 0, parse("(p | q) WOULD[a] !p"))
    assert not eval_at(ctx, idle, 0, parse("(p | q) MIGHT[a] p"))
    assert not eval_at(ctx, idle, 0, parse("(p | q) UWOULD[a] p"))
    assert not eval_at(ctx, idle, 0, parse("(p | q) UWOULD[a] !p"))
    assert eval_at(ctx, idle, 0, parse("(p | q) EMIGHT[a] p"))
    assert eval_at(ctx, idle, 0, parse("(p | q) EMIGHT[a] !p"))

    # strengthening the antecedent pins the world down
    assert eval_at(ctx, idle, 0, parse("(p & q) UWOULD[a] p"))
    assert eval_at(ctx, idle, 0, parse("p MIGHT[a] p"))
    assert not eval_at(ctx, idle, 0, parse("p MIGHT[a] q"))

    # vacuity: unsatisfiable antecedent
    assert eval_at(ctx, idle, 0, parse("(p & !p) WOULD[a] q"))
    assert eval_at(ctx, idle, 0, parse("(p & !p) UWOULD[a] q"))
    assert not eval_at(ctx, idle, 0, parse("(p & !p) MIGHT[a] q"))
    assert not eval_at(ctx, idle, 0, parse("(p & !p) EMIGHT[a] q"))

    # from | {p}: the closest p-world is itself
    tp = u.traces[1]
    assert eval_at(ctx, tp, 0, parse("p UWOULD[a] p"))
    assert not eval_at(ctx, tp, 0, parse("p MIGHT[a] q"))


def test_closest_antecedents_on_pinned_universe():
    s, u = cf_fixture()
    ctx = EvalContext.exact(s, u)
    idle, tp, tq, tpq = u.traces
    got = closest_antecedents(ctx, "a", idle, 0, parse("p | q"))
    assert set(got) == {tp, tq}
    got = closest_antecedents(ctx, "a", idle, 0, parse("p & q"))
    assert set(got) == {tpq}
    assert closest_antecedents(ctx, "a", idle, 0, parse("p & !p")) == ()


def test_duality_laws_and_truth_axiom():
    r = random.Random(105)
    for _ in range(120):
        s = gen_system(r)
        u = gen_universe(r)
        ctx = EvalContext.exact(s, u, stabilization_cap=256)
        ante = gen_formula(r, depth=2, know=0, cf=0)
        cons = gen_formula(r, depth=2, know=0, cf=0)
        body = gen_formula(r, depth=2, know=0, cf=0)
        a = r.choice(s.agents)
        t = r.choice(u.traces)
        i = r.randint(0, 2)
        might = eval_at(ctx, t, i, Might(a, ante, cons))
        would_not = eval_at(ctx, t, i, Would(a, ante, Not(cons)))
        assert might == (not would_not)
        emight = eval_at(ctx, t, i, EMight(a, ante, cons))
        uwould_not = eval_at(ctx, t, i, UWould(a, ante, Not(cons)))
        assert emight == (not uwould_not)
        # knowledge is veridical: K[a] body -> body
        if eval_at(ctx, t, i, Know(a, body)):
            assert eval_at(ctx, t, i, body)


def test_know_is_exact_quantification_over_obs_equivalent_traces():
    s, u = cf_fixture()
    limited = System(
        kripke=s.kripke,
        agents=("a",),
        observation={"a": frozenset({"p"})},  # blind to q
        similarity=dict(s.similarity.items()),
    )
    ctx = EvalContext.exact(limited, u)
    idle, tp, tq, tpq = u.traces
    # idle and | {q} look alike; | {p} and | {p,q} look alike
    assert eval_at(ctx, tp, 0, parse("K[a] p"))
    assert not eval_at(ctx, tp, 0, parse("K[a] q"))
    assert not eval_at(ctx, tpq, 0, parse("K[a] q"))
    assert eval_at(ctx, idle, 0, parse("K[a] !p"))
    assert not eval_at(ctx, idle, 0, parse("K[a] !q"))


# ---------------------------------------------------------------------------
# verdicts, trails, tables


def test_check_system_reports_all_counterexamples_in_order():
    s, u = cf_fixture()
    ctx = EvalContext.exact(s, u)
    v = check_system(ctx, parse("p | q"))
    assert not v.result
    assert v.counterexample == "| {}"
    assert v.counterexamples == ("| {}",)
    assert v.position == 0
    assert v.trail  # explanation attached to the first failure

    v = check_system(ctx, parse("p"))
    assert v.counterexamples == ("| {}", "| {q}")

    v = check_system(ctx, parse("true"))
    assert v.result and v.counterexample is None and v.trail == ()

    d = v.to_dict()
    assert d["result"] is True and d["counterexamples"] == []


def test_explain_trail_walks_to_the_failure():
    s, u = cf_fixture()
    ctx = EvalContext.exact(s, u)
    tp = u.traces[1]
    f = parse("G (p -> q)")
    trail = explain(ctx, tp, 0, f)
    assert trail[0].formula == "G (p -> q)"
    assert trail[0].value is False
    assert trail[0].position == 0
    # the walk descends to the failing position of the body, then into the
    # false implication's consequent
    srcs = [(e.formula, e.value) for e in trail]
    assert ("p -> q", False) in srcs
    assert srcs[-1] == ("q", False)
    assert all(e.trace == "| {p}" for e in trail)

    # a holding G stops at the root: there is no single witness to show
    assert len(explain(ctx, u.traces[0], 0, f)) == 1

    long_trail = explain(ctx, tp, 0, parse("G ((p -> q) & (p -> q))"), limit=2)
    assert len(long_trail) <= 2


def test_explain_crosses_traces_for_knowledge():
    s, u = cf_fixture()
    limited = System(
        kripke=s.kripke,
        agents=("a",),
        observation={"a": frozenset({"p"})},
        similarity=dict(s.similarity.items()),
    )
    ctx = EvalContext.exact(limited, u)
    idle = u.traces[0]
    trail = explain(ctx, idle, 0, parse("K[a] !q"))
    assert trail[0].value is False
    # the witness lives on the observationally equivalent trace | {q}
    steps = [(e.formula, e.trace, e.value) for e in trail]
    assert ("!q", "| {q}", False) in steps
    assert steps[-1] == ("q", "| {q}", True)


def test_stabilize_table_shape():
    s, u = cf_fixture()
    t = tr("{p} ; {} | {q} ; {}")
    u2 = universe_of(list(u.traces) + [t])
    ctx = EvalContext.exact(s, u2)
    f = parse("F p & Y q")
    table = stabilize(ctx, t, f)
    assert table.trace == "{p} ; {} | {q} ; {}"
    assert table.unrollings >= 1
    assert table.positions == len(t.prefix) + table.unrollings * len(t.loop)
    assert set(table.rows) == {"F p & Y q", "F p", "Y q", "p", "q"}
    assert table.order == tuple(table.rows)
    for vals in table.rows.values():
        assert len(vals) == table.positions
    # the block after the table repeats the table's final block (the engine
    # stays exact past the cut)
    span = len(t.loop)
    from ckltl import subformulas, to_source

    for g in subformulas(f):
        tail = [ctx.value(t, g, table.positions + j) for j in range(span)]
        assert tail == list(table.rows[to_source(g)][-span:])
    # ground truth for the atom row: p only at position 0
    assert table.rows["p"] == tuple(
        j == 0 for j in range(table.positions)
    )


def test_bounded_context_never_stabilizes():
    s, u = cf_fixture()
    ctx = EvalContext.bounded(s, u, 4)
    with pytest.raises(ValueError):
        stabilize(ctx, u.traces[0], parse("p"))


def test_stabilization_cap_trips_on_deep_past_nesting():
    # a forward scan over a deeply nested past body needs the body's proven
    # period, which doubles per nesting level; a tiny cap refuses the work
    s, u = cf_fixture()
    t = tr("{p} ; {q} | {} ; {p} ; {q}")
    u2 = universe_of(list(u.traces) + [t])
    ctx = EvalContext.exact(s, u2, stabilization_cap=2)
    f = parse("G (p S (q S (p S (q S p))))")
    with pytest.raises(StabilizationCapExceeded) as e:
        eval_at(ctx, t, 0, f)
    assert e.value.needed > e.value.cap == 2
    # a roomy cap handles the same query
    roomy = EvalContext.exact(s, u2, stabilization_cap=256)
    eval_at(roomy, t, 0, f)
    # evaluating the bare past body at a fixed position never needs the cap:
    # the engine just walks the recurrence left of the position
    eval_at(ctx, t, 1, f.child)


def test_position_and_mode_validation():
    s, u = cf_fixture()
    exact = EvalContext.exact(s, u)
    with pytest.raises(ValueError):
        eval_at(exact, u.traces[0], -1, parse("p"))
    bounded = EvalContext.bounded(s, u, 3)
    with pytest.raises(ValueError):
        eval_at(bounded, u.traces[0], 4, parse("p"))  # beyond the bound
    with pytest.raises(ValueError):
        EvalContext.bounded(s, u, -1)
    with pytest.raises(ValueError):
        eval_at(exact, tr("| {p} ; {p,q}"), 0, parse("p"))  # foreign trace


# ---------------------------------------------------------------------------
# similarity diagnostics


def test_validate_similarity_clean_on_subset_template():
    s, u = cf_fixture()
    ctx = EvalContext.exact(s, u)
    for t in u:
        report = validate_similarity(ctx, "a", t, 0)
        assert report.ok
        assert report.violations == ()


def test_validate_similarity_flags_bad_relation():
    from ckltl import validate_relational

    s, u = cf_fixture()
    # "closer" iff the far trace has p right now: not reflexive, not minimal
    bogus = validate_relational(
        parse("p@pi2 & !p@pi1"), ("pi", "pi1", "pi2")
    )
    bad = System(
        kripke=s.kripke,
        agents=("a",),
        observation={"a": frozenset({"p", "q"})},
        similarity={"a": bogus},
    )
    ctx = EvalContext.exact(bad, u)
    report = validate_similarity(ctx, "a", u.traces[0], 0)
    assert not report.ok
    kinds = {v.kind for v in report.violations}
    assert "irreflexive" in kinds or "minimum" in kinds
