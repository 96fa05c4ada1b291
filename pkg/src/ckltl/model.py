"""Finite multi-agent structures: states, transitions, observation and
similarity maps, plus the JSON file format.

A structure is serial (every state has a successor).  Each agent owns a set of
observable propositions and a relational similarity formula over three trace
variables (reference, closer candidate, farther candidate) that induces its
counterfactual accessibility and comparative-similarity relations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .formula import (
    And,
    Formula,
    Globally,
    Historically,
    Iff,
    Implies,
    Not,
    ParseError,
    RelationalFormula,
    RelationalFormulaError,
    TracedAtom,
    conjoin,
    parse,
    to_source,
    validate_relational,
)


class ModelFormatError(ValueError):
    """Malformed model file (bad JSON, missing or mistyped fields)."""


class InvariantViolation(ValueError):
    """A structural invariant of the model does not hold."""

    def __init__(self, problems: list[str]):
        self.problems = tuple(problems)
        super().__init__("; ".join(problems))


class UnknownAgentError(KeyError):
    def __init__(self, agent: str):
        super().__init__(agent)
        self.agent = agent

    def __str__(self) -> str:
        return f"unknown agent: {self.agent!r}"


@dataclass(frozen=True)
class KripkeStructure:
    """States with labels and a serial transition relation.

    Treated as immutable after construction; all mappings are private copies.
    """

    states: tuple[str, ...]
    initial: str
    transitions: Mapping[str, tuple[str, ...]]
    aps: tuple[str, ...]
    labels: Mapping[str, frozenset]

    def validate(self) -> list[str]:
        problems = []
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            problems.append("duplicate state ids")
        if self.initial not in state_set:
            problems.append(f"initial state {self.initial!r} is not a state")
        ap_set = set(self.aps)
        for s in self.states:
            succ = self.transitions.get(s, ())
            if not succ:
                problems.append(f"state {s!r} has no successor (relation must be serial)")
            for s2 in succ:
                if s2 not in state_set:
                    problems.append(f"transition {s!r} -> {s2!r} leaves the state set")
            extra = self.labels.get(s, frozenset()) - ap_set
            if extra:
                problems.append(
                    f"state {s!r} is labeled with undeclared propositions {sorted(extra)}"
                )
        for s in self.transitions:
            if s not in state_set:
                problems.append(f"transitions declared for unknown state {s!r}")
        for s in self.labels:
            if s not in state_set:
                problems.append(f"labels declared for unknown state {s!r}")
        return problems


@dataclass(frozen=True)
class System:
    """A structure together with per-agent observations and similarity."""

    kripke: KripkeStructure
    agents: tuple[str, ...]
    observation: Mapping[str, frozenset]
    similarity: Mapping[str, RelationalFormula]

    def observation_of(self, agent: str) -> frozenset:
        try:
            return frozenset(self.observation[agent])
        except KeyError:
            raise UnknownAgentError(agent) from None

    def similarity_of(self, agent: str) -> RelationalFormula:
        try:
            return self.similarity[agent]
        except KeyError:
            raise UnknownAgentError(agent) from None

    def validate(self) -> list[str]:
        problems = self.kripke.validate()
        agent_set = set(self.agents)
        if len(agent_set) != len(self.agents):
            problems.append("duplicate agent names")
        for mapping, what in ((self.observation, "observation"), (self.similarity, "similarity")):
            if set(mapping) != agent_set:
                problems.append(
                    f"{what} map domain {sorted(mapping)} differs from agents {sorted(agent_set)}"
                )
        ap_set = set(self.kripke.aps)
        for a, obs in self.observation.items():
            extra = set(obs) - ap_set
            if extra:
                problems.append(
                    f"agent {a!r} observes undeclared propositions {sorted(extra)}"
                )
        return problems


def validate_system(system: System) -> list[str]:
    """All invariant violations, as human-readable strings (empty if none)."""
    return system.validate()


# ---------------------------------------------------------------------------
# JSON format
# ---------------------------------------------------------------------------
#
# {
#   "aps": ["p", ...],
#   "states": [{"id": "s0", "labels": ["p", ...]}, ...],
#   "initial": "s0",
#   "transitions": {"s0": ["s0", "s1"], ...},
#   "agents": [
#     {"name": "a",
#      "observes": ["p", ...],
#      "similarity": {"params": ["pi", "pi1", "pi2"], "formula": "..."}}
#   ]
# }


def system_to_dict(system: System) -> dict:
    k = system.kripke
    return {
        "aps": list(k.aps),
        "states": [{"id": s, "labels": sorted(k.labels[s])} for s in k.states],
        "initial": k.initial,
        "transitions": {s: list(k.transitions[s]) for s in k.states},
        "agents": [
            {
                "name": a,
                "observes": sorted(system.observation[a]),
                "similarity": {
                    "params": list(system.similarity[a].params),
                    "formula": to_source(system.similarity[a].formula),
                },
            }
            for a in system.agents
        ],
    }


def system_from_dict(data: dict) -> System:
    try:
        aps = tuple(data["aps"])
        state_items = data["states"]
        states = tuple(item["id"] for item in state_items)
        labels = {item["id"]: frozenset(item["labels"]) for item in state_items}
        initial = data["initial"]
        transitions = {s: tuple(ts) for s, ts in data["transitions"].items()}
        agent_items = data["agents"]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    kripke = KripkeStructure(states, initial, transitions, aps, labels)
    agents = []
    observation = {}
    similarity = {}
    for item in agent_items:
        try:
            name = item["name"]
            obs = frozenset(item["observes"])
            params = tuple(item["similarity"]["params"])
            formula_text = item["similarity"]["formula"]
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"malformed agent entry: {exc}") from exc
        if len(params) != 3:
            raise ModelFormatError(
                f"agent {name!r}: similarity needs exactly 3 trace parameters"
            )
        agents.append(name)
        observation[name] = obs
        try:
            similarity[name] = validate_relational(parse(formula_text), params)
        except (ParseError, RelationalFormulaError) as exc:
            raise ModelFormatError(
                f"agent {name!r}: bad similarity formula: {exc}"
            ) from exc
    system = System(kripke, tuple(agents), observation, similarity)
    problems = system.validate()
    if problems:
        raise InvariantViolation(problems)
    return system


def load_system(path) -> System:
    """Load and fully validate a model file.

    Raises :class:`ModelFormatError` on malformed input and
    :class:`InvariantViolation` when a structural rule fails.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    return system_from_dict(data)


def save_system(system: System, path) -> None:
    Path(path).write_text(
        json.dumps(system_to_dict(system), indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Similarity templates
# ---------------------------------------------------------------------------

SIM_PARAMS = ("pi", "pi1", "pi2")


def subset_similarity(
    props, params: tuple[str, str, str] = SIM_PARAMS
) -> RelationalFormula:
    """Change-set containment similarity over the given propositions.

    The candidate bound to the second parameter is at least as similar to the
    reference as the third-parameter candidate when, at every position (future
    and past), every proposition on which the closer candidate differs from
    the reference also differs on the farther candidate::

        G (AND_p (!(p@pi <-> p@pi1) -> !(p@pi <-> p@pi2)))
      & H (AND_p ...)

    The induced relation is a preorder with the reference itself as minimum.
    """
    ref, near, far = params
    parts = []
    for p in props:
        on_ref = TracedAtom(p, ref)
        differs_near = Not(Iff(on_ref, TracedAtom(p, near)))
        differs_far = Not(Iff(on_ref, TracedAtom(p, far)))
        parts.append(Implies(differs_near, differs_far))
    # one shared block node: the evaluator caches per node object, so the
    # future- and past-closed halves reuse each other's work
    block = conjoin(parts)
    body = And(Globally(block), Historically(block))
    return validate_relational(body, params)
