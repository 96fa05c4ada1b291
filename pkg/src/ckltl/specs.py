"""Builders for counterfactual-explainability requirements, and empirical
entailment probes between requirement families.

The requirements share one shape: at every moment that the outcome is absent,
the knower must know that some pair of attribute literals might
(counterfactually) have produced it.  The families differ in where the pair
disjunction sits and whose attributes feed it:

* ICE  -- G(!outcome -> OR_{a,b} K[ag]((a & b) MIGHT[ag] outcome))
* WCE  -- G(!outcome -> K[ag]((OR_{a,b} a & b) MIGHT[ag] outcome))
* GCE  -- ICE shape, pairs drawn from two agents' literal closures
* ECE  -- ICE shape, K and MIGHT moved to another agent

Pairs range over unordered, distinct, jointly satisfiable literal pairs
(never p & !p).  Entailment between families is probed empirically over a
concrete family of systems; the probe reports evidence and never asserts an
inclusion that the verdicts do not show.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Formula,
    Globally,
    Implies,
    Know,
    Might,
    Next,
    Not,
    disjoin,
    to_source,
)
from .model import System
from .semantics import EvalContext, Verdict, check_system


@dataclass(frozen=True)
class AttrLiteral:
    """An attribute proposition or its negation."""

    name: str
    positive: bool = True

    def as_formula(self) -> Formula:
        atom = Atom(self.name)
        return atom if self.positive else Not(atom)

    def complements(self, other: "AttrLiteral") -> bool:
        return self.name == other.name and self.positive != other.positive

    def __str__(self) -> str:
        return self.name if self.positive else f"!{self.name}"


@dataclass(frozen=True)
class AttributeVocabulary:
    """Per-agent attribute propositions plus the outcome proposition.

    `positives` maps an agent to its positive attribute propositions; the
    literal closure of an agent is those plus their negations, in that order.
    `literals` may override the closure for specific agents (used for
    degenerate vocabularies in tests)."""

    positives: Mapping[str, tuple[str, ...]]
    outcome: str
    literals: Mapping[str, tuple[AttrLiteral, ...]] | None = None

    def agents(self) -> tuple[str, ...]:
        return tuple(self.positives)

    def literals_of(self, agent: str) -> tuple[AttrLiteral, ...]:
        if self.literals is not None and agent in self.literals:
            return tuple(self.literals[agent])
        if agent not in self.positives:
            raise KeyError(f"no attributes declared for agent {agent!r}")
        pos = self.positives[agent]
        return tuple(AttrLiteral(p) for p in pos) + tuple(
            AttrLiteral(p, False) for p in pos
        )

    def validate_for(self, system: System) -> list[str]:
        """Invariant violations against a concrete system (empty if none)."""
        problems = []
        aps = set(system.kripke.aps)
        if self.outcome not in aps:
            problems.append(f"outcome {self.outcome!r} not among the propositions")
        for agent, props in self.positives.items():
            if agent not in system.agents:
                problems.append(f"vocabulary names unknown agent {agent!r}")
            for p in props:
                if p not in aps:
                    problems.append(f"attribute {p!r} not among the propositions")
        if self.literals:
            for agent, lits in self.literals.items():
                for lit in lits:
                    if lit.name not in aps:
                        problems.append(
                            f"attribute {lit.name!r} not among the propositions"
                        )
        return problems


def satisfiable_pairs(
    literals: Sequence[AttrLiteral],
) -> tuple[tuple[AttrLiteral, AttrLiteral], ...]:
    """Unordered distinct jointly-satisfiable pairs, in input order.

    When no such pair exists (one literal, or only complementary ones), falls
    back to the degenerate self-pairs (a, a), which builders collapse to the
    bare literal."""
    out = [
        (literals[i], literals[j])
        for i in range(len(literals))
        for j in range(i + 1, len(literals))
        if literals[i] != literals[j] and not literals[i].complements(literals[j])
    ]
    if not out:
        out = [(lit, lit) for lit in literals]
    return tuple(out)


def _pair_formula(a: AttrLiteral, b: AttrLiteral) -> Formula:
    if a == b:
        return a.as_formula()
    return And(a.as_formula(), b.as_formula())


def _pairs_for(vocab: AttributeVocabulary, agents: Iterable[str]):
    lits: list[AttrLiteral] = []
    for agent in agents:
        for lit in vocab.literals_of(agent):
            if lit not in lits:
                lits.append(lit)
    if not lits:
        raise ValueError("empty attribute set")
    return satisfiable_pairs(lits)


def _requirement(
    pairs, knower: str, cf_agent: str, outcome: str, joint_antecedent: bool
) -> Formula:
    offer = Atom(outcome)
    if joint_antecedent:
        ante = disjoin([_pair_formula(a, b) for a, b in pairs])
        body = Know(knower, Might(cf_agent, ante, offer))
    else:
        body = disjoin(
            [
                Know(knower, Might(cf_agent, _pair_formula(a, b), offer))
                for a, b in pairs
            ]
        )
    return Globally(Implies(Not(offer), body))


def build_ice(vocab: AttributeVocabulary, agent: str) -> Formula:
    """Internal explainability: at each outcome-less moment the agent knows,
    for some pair of its own attribute literals, that the pair might have
    produced the outcome."""
    return _requirement(
        _pairs_for(vocab, [agent]), agent, agent, vocab.outcome, False
    )


def build_wce(vocab: AttributeVocabulary, agent: str) -> Formula:
    """Weak variant: one knowledge operator around a single counterfactual
    whose antecedent disjoins all the pairs."""
    return _requirement(
        _pairs_for(vocab, [agent]), agent, agent, vocab.outcome, True
    )


def build_gce(vocab: AttributeVocabulary, knower: str, cf_agent: str) -> Formula:
    """General variant: pairs drawn from every agent's literal closure in the
    vocabulary (insertion order, duplicates dropped)."""
    return _requirement(
        _pairs_for(vocab, vocab.agents()), knower, cf_agent, vocab.outcome, False
    )


def build_ece(vocab: AttributeVocabulary, attr_agent: str, agent: str) -> Formula:
    """External variant: pairs over `attr_agent`'s literals, knowledge and
    counterfactual judged by `agent`."""
    return _requirement(
        _pairs_for(vocab, [attr_agent]), agent, agent, vocab.outcome, False
    )


def position_variant(f: Formula, k: int) -> Formula:
    """The body of a G-shaped requirement checked at position k only:
    G(body) -> X^k(body)."""
    if not isinstance(f, Globally):
        raise ValueError("position_variant needs a G-shaped formula")
    if k < 0:
        raise ValueError("position must be >= 0")
    out = f.child
    for _ in range(k):
        out = Next(out)
    return out


# ---------------------------------------------------------------------------
# entailment probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeMember:
    label: str
    holds_first: bool
    holds_second: bool
    first: Verdict
    second: Verdict

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "holds_first": self.holds_first,
            "holds_second": self.holds_second,
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
        }


@dataclass(frozen=True)
class ProbeReport:
    """Empirical evidence about the inclusion Mod(f1) <= Mod(f2) over one
    family of systems.  `inclusion_consistent` means no member satisfied f1
    while falsifying f2; strictness witnesses satisfied f2 but not f1.  The
    report never claims more than the family shows."""

    first: str
    second: str
    members: tuple[ProbeMember, ...]
    inclusion_consistent: bool
    inclusion_counterexamples: tuple[str, ...]
    strictness_witnesses: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "first": self.first,
            "second": self.second,
            "members": [m.to_dict() for m in self.members],
            "inclusion_consistent": self.inclusion_consistent,
            "inclusion_counterexamples": list(self.inclusion_counterexamples),
            "strictness_witnesses": list(self.strictness_witnesses),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            "entailment probe",
            f"  f1: {self.first}",
            f"  f2: {self.second}",
        ]
        for m in self.members:
            lines.append(
                f"  [{m.label}] f1={'sat' if m.holds_first else 'unsat'} "
                f"f2={'sat' if m.holds_second else 'unsat'}"
            )
            for tag, v in (("f1", m.first), ("f2", m.second)):
                if not v.result:
                    lines.append(
                        f"    {tag} counterexample: {v.counterexample} "
                        f"({len(v.counterexamples)} failing)"
                    )
        if self.inclusion_consistent:
            lines.append("  family is consistent with Mod(f1) <= Mod(f2)")
        else:
            lines.append(
                "  inclusion violated by: "
                + ", ".join(self.inclusion_counterexamples)
            )
        if self.strictness_witnesses:
            lines.append(
                "  strictness witnessed by: " + ", ".join(self.strictness_witnesses)
            )
        else:
            lines.append("  no strictness witness in this family")
        return "\n".join(lines)


def entailment_probe(
    f1: Formula,
    f2: Formula,
    family: Sequence,
    stabilization_cap: int = 64,
) -> ProbeReport:
    """Check f1 and f2 on every family member and classify the evidence.

    Family entries are (label, system, universe) triples; plain
    (system, universe) pairs get positional labels."""
    members = []
    for idx, entry in enumerate(family):
        if len(entry) == 3:
            label, system, universe = entry
        else:
            system, universe = entry
            label = f"member-{idx}"
        ctx = EvalContext.exact(system, universe, stabilization_cap)
        v1 = check_system(ctx, f1)
        v2 = check_system(ctx, f2)
        members.append(ProbeMember(label, v1.result, v2.result, v1, v2))
    bad = tuple(m.label for m in members if m.holds_first and not m.holds_second)
    wit = tuple(m.label for m in members if m.holds_second and not m.holds_first)
    return ProbeReport(
        to_source(f1),
        to_source(f2),
        tuple(members),
        not bad,
        bad,
        wit,
    )
