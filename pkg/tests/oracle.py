"""A deliberately naive bounded-window evaluator used as a second route.

Differences from the engine are structural, not cosmetic: no memoization, no
zipped traces (relational formulas read trace variables from an environment),
observation equivalence recomputed per query, and each counterfactual variant
written out as its own textbook quantifier pattern instead of sharing a
negated-consequent core.  Agreement between this and the engine is therefore
evidence, not an echo.
"""

from __future__ import annotations

from ckltl import (
    And,
    Atom,
    EMight,
    Eventually,
    FalseConst,
    Globally,
    Historically,
    Iff,
    Implies,
    Know,
    Might,
    Next,
    Not,
    Once,
    Or,
    Prev,
    Since,
    TracedAtom,
    TrueConst,
    Until,
    UWould,
    Would,
)


def obs_eq(system, agent, t1, t2, i):
    obs = system.observation_of(agent)
    return all(
        (t1.label_at(j) & obs) == (t2.label_at(j) & obs) for j in range(i + 1)
    )


def naive(system, universe, n, t, f, i, env=None):
    """Truth of `f` on trace `t` at position `i` over the window [0, n]."""

    def ev(t, f, i, env):
        if isinstance(f, Atom):
            return f.name in t.label_at(i)
        if isinstance(f, TracedAtom):
            return f.name in env[f.trace_var].label_at(i)
        if isinstance(f, TrueConst):
            return True
        if isinstance(f, FalseConst):
            return False
        if isinstance(f, Not):
            return not ev(t, f.child, i, env)
        if isinstance(f, And):
            return ev(t, f.left, i, env) and ev(t, f.right, i, env)
        if isinstance(f, Or):
            return ev(t, f.left, i, env) or ev(t, f.right, i, env)
        if isinstance(f, Implies):
            return (not ev(t, f.left, i, env)) or ev(t, f.right, i, env)
        if isinstance(f, Iff):
            return ev(t, f.left, i, env) == ev(t, f.right, i, env)
        if isinstance(f, Next):
            return i + 1 <= n and ev(t, f.child, i + 1, env)
        if isinstance(f, Prev):
            return i > 0 and ev(t, f.child, i - 1, env)
        if isinstance(f, Until):
            return any(
                ev(t, f.right, k, env)
                and all(ev(t, f.left, j, env) for j in range(i, k))
                for k in range(i, n + 1)
            )
        if isinstance(f, Since):
            return any(
                ev(t, f.right, k, env)
                and all(ev(t, f.left, j, env) for j in range(k + 1, i + 1))
                for k in range(0, i + 1)
            )
        if isinstance(f, Eventually):
            return any(ev(t, f.child, k, env) for k in range(i, n + 1))
        if isinstance(f, Globally):
            return all(ev(t, f.child, k, env) for k in range(i, n + 1))
        if isinstance(f, Once):
            return any(ev(t, f.child, k, env) for k in range(0, i + 1))
        if isinstance(f, Historically):
            return all(ev(t, f.child, k, env) for k in range(0, i + 1))
        if isinstance(f, Know):
            return all(
                ev(t2, f.child, i, env)
                for t2 in universe
                if obs_eq(system, f.agent, t, t2, i)
            )
        if isinstance(f, (Would, Might, UWould, EMight)):
            return cf(t, f, i, env)
        raise TypeError(f"naive oracle got {f!r}")

    def sim(agent, ref, t1, t2, i):
        rf = system.similarity_of(agent)
        bound = {rf.params[0]: ref, rf.params[1]: t1, rf.params[2]: t2}
        return ev(ref, rf.formula, i, bound)

    def cf(t, f, i, env):
        a = f.agent
        traces = list(universe)
        acc = [
            x for x in traces if sim(a, t, t, x, i) and ev(x, f.ante, i, env)
        ]
        ante_holds = [x for x in traces if ev(x, f.ante, i, env)]
        if isinstance(f, Would):
            if not acc:
                return True
            return any(
                all(
                    ev(y, f.cons, i, env)
                    for y in ante_holds
                    if sim(a, t, y, x, i)
                )
                for x in acc
            )
        if isinstance(f, Might):
            # not (ante Would not-cons)
            if not acc:
                return False
            return all(
                any(
                    ev(y, f.cons, i, env)
                    for y in ante_holds
                    if sim(a, t, y, x, i)
                )
                for x in acc
            )
        if isinstance(f, UWould):
            return all(
                any(
                    ev(e, f.ante, i, env)
                    and sim(a, t, e, x, i)
                    and all(
                        ev(y, f.cons, i, env)
                        for y in ante_holds
                        if sim(a, t, y, e, i)
                    )
                    for e in traces
                )
                for x in acc
            )
        # EMight: not (ante UWould not-cons)
        if not acc:
            return False
        return any(
            all(
                any(
                    ev(y, f.cons, i, env)
                    for y in ante_holds
                    if sim(a, t, y, e, i)
                )
                for e in traces
                if ev(e, f.ante, i, env) and sim(a, t, e, x, i)
            )
            for x in acc
        )

    return ev(t, f, i, env or {})
