"""Lasso traces, trace universes, and observation machinery.

A lasso trace `u . v^omega` denotes an ultimately periodic infinite word of
label sets: `prefix` cells first, then the nonempty `loop` repeated forever.
Universes are finite ordered collections of lasso traces standing in for the
(generally infinite) set of traces of a structure; all trace quantifiers in
the semantics range over one universe.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Iterator

Label = frozenset


class SizeLimitExceeded(RuntimeError):
    """Universe generation hit the configured trace-count cap."""


class NotAPathOfModel(ValueError):
    """A user-supplied trace is not realizable as an initial path."""


@dataclass(frozen=True)
class LassoTrace:
    """Ultimately periodic trace: `prefix` then `loop` forever (loop nonempty).

    Labels are frozensets; ordinary traces carry proposition names, zipped
    traces carry `(proposition, trace_var)` pairs.
    """

    prefix: tuple[frozenset, ...]
    loop: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def label_at(self, i: int) -> frozenset:
        if i < 0:
            raise IndexError("trace positions start at 0")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def canonical(self) -> "LassoTrace":
        """Unique minimal representation of the denoted word: smallest loop
        period, then every prefix cell that merely repeats the loop absorbed
        into it."""
        loop = _minimal_period(self.loop)
        prefix = list(self.prefix)
        while prefix and prefix[-1] == loop[-1]:
            loop = (loop[-1],) + loop[:-1]
            prefix.pop()
        return LassoTrace(tuple(prefix), loop)

    def same_word(self, other: "LassoTrace") -> bool:
        return self.canonical() == other.canonical()


def _minimal_period(loop: tuple[frozenset, ...]) -> tuple[frozenset, ...]:
    n = len(loop)
    for d in range(1, n + 1):
        if n % d == 0 and loop == loop[:d] * (n // d):
            return loop[:d]
    return loop


# ---------------------------------------------------------------------------
# Trace literals:  "{} ; {a,b} | {c}" -- prefix cells before '|', loop after.
# ---------------------------------------------------------------------------


def parse_trace_literal(text: str) -> LassoTrace:
    """Parse `"{p} ; {q} | {r}"` style notation (cells are `,`-separated
    proposition sets in braces, `;` between cells, `|` before the loop)."""
    if "|" not in text:
        raise ValueError(f"trace literal needs a '|' before the loop: {text!r}")
    pre_text, loop_text = text.split("|", 1)
    prefix = tuple(_parse_cells(pre_text))
    loop = tuple(_parse_cells(loop_text))
    if not loop:
        raise ValueError(f"trace literal has an empty loop: {text!r}")
    return LassoTrace(prefix, loop)


def _parse_cells(text: str) -> list[frozenset]:
    cells = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("{") and chunk.endswith("}")):
            raise ValueError(f"malformed trace cell: {chunk!r}")
        inner = chunk[1:-1].strip()
        if inner:
            cells.append(frozenset(p.strip() for p in inner.split(",")))
        else:
            cells.append(frozenset())
    return cells


def format_trace(trace: LassoTrace) -> str:
    """Canonical literal for a trace (propositions sorted inside each cell)."""

    def cell(s: frozenset) -> str:
        return "{" + ",".join(sorted(s)) + "}"

    pre = " ; ".join(cell(c) for c in trace.prefix)
    loop = " ; ".join(cell(c) for c in trace.loop)
    return f"{pre} | {loop}" if pre else f"| {loop}"


# ---------------------------------------------------------------------------
# Zipping for relational formulas
# ---------------------------------------------------------------------------


def zip3(
    t1: LassoTrace,
    t2: LassoTrace,
    t3: LassoTrace,
    names: tuple[str, str, str],
) -> LassoTrace:
    """Zip three traces into one whose labels tag each proposition with the
    trace variable it came from: position i carries
    `{(p, names[k]) | p in tk[i]}`.

    The result's prefix length is the max of the inputs' prefix lengths and
    its loop length the lcm of theirs, so `label_at` agrees with the pointwise
    construction at every position.
    """
    traces = (t1, t2, t3)
    pre_len = max(len(t.prefix) for t in traces)
    loop_len = lcm(*(len(t.loop) for t in traces))

    def cell(i: int) -> frozenset:
        out = set()
        for t, name in zip(traces, names):
            for p in t.label_at(i):
                out.add((p, name))
        return frozenset(out)

    prefix = tuple(cell(i) for i in range(pre_len))
    loop = tuple(cell(pre_len + j) for j in range(loop_len))
    return LassoTrace(prefix, loop)


# ---------------------------------------------------------------------------
# Observation projections
# ---------------------------------------------------------------------------


def obs_divergence_point(system, agent: str, t1: LassoTrace, t2: LassoTrace):
    """Smallest position where the agent's observations of t1 and t2 differ,
    or None if they never do.  Decided exactly: positions beyond
    max-prefix + lcm-of-loops repeat earlier ones."""
    obs = system.observation_of(agent)
    bound = max(len(t1.prefix), len(t2.prefix)) + lcm(len(t1.loop), len(t2.loop))
    for j in range(bound):
        if (t1.label_at(j) & obs) != (t2.label_at(j) & obs):
            return j
    return None


def obs_prefix_eq(system, agent: str, t1: LassoTrace, t2: LassoTrace, i: int) -> bool:
    """True iff the agent observes identical prefixes of t1 and t2 up to and
    including position i (synchronous perfect recall)."""
    d = obs_divergence_point(system, agent, t1, t2)
    return d is None or d > i


# ---------------------------------------------------------------------------
# Universes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceUniverse:
    """Finite ordered set of distinct lasso traces with provenance."""

    traces: tuple[LassoTrace, ...]
    origins: tuple[str, ...] = field(default=())  # 'model' or 'user', per trace
    provenance: str = "user"

    def __post_init__(self):
        if not self.origins:
            object.__setattr__(self, "origins", tuple("user" for _ in self.traces))
        if len(self.origins) != len(self.traces):
            raise ValueError("origins must align with traces")
        seen = set()
        for t in self.traces:
            c = t.canonical()
            if c in seen:
                raise ValueError(f"duplicate trace in universe: {format_trace(t)}")
            seen.add(c)

    def __iter__(self) -> Iterator[LassoTrace]:
        return iter(self.traces)

    def __len__(self) -> int:
        return len(self.traces)

    def index(self, trace: LassoTrace) -> int:
        c = trace.canonical()
        for k, t in enumerate(self.traces):
            if t.canonical() == c:
                return k
        raise KeyError(f"trace not in universe: {format_trace(trace)}")

    def __contains__(self, trace: LassoTrace) -> bool:
        try:
            self.index(trace)
            return True
        except KeyError:
            return False


def universe_of(traces: Iterable[LassoTrace], provenance: str = "user") -> TraceUniverse:
    """Universe from explicit traces (canonicalized, order-preserving dedup)."""
    out: list[LassoTrace] = []
    seen = set()
    for t in traces:
        c = t.canonical()
        if c not in seen:
            seen.add(c)
            out.append(c)
    return TraceUniverse(tuple(out), tuple("user" for _ in out), provenance)


def generate_universe(
    system_or_kripke,
    max_prefix: int,
    max_loop: int,
    *,
    loop_states: Iterable[str] | None = None,
    max_traces: int = 1_000_000,
) -> TraceUniverse:
    """Enumerate every initial lasso of the structure with |prefix| <= max_prefix
    and |loop| <= max_loop, deduplicated by denoted word.

    All state steps respect the transition relation, including the step from
    the last prefix state into the loop and the loop-closing step.  If
    `loop_states` is given, every loop state must belong to it.  Raises
    :class:`SizeLimitExceeded` when more than `max_traces` distinct traces
    would be produced; warns when the result is empty.
    """
    k = getattr(system_or_kripke, "kripke", system_or_kripke)
    if max_prefix < 0 or max_loop < 1:
        raise ValueError("need max_prefix >= 0 and max_loop >= 1")
    allowed = set(loop_states) if loop_states is not None else None
    if allowed is not None:
        unknown = allowed - set(k.states)
        if unknown:
            raise ValueError(f"loop_states not in the model: {sorted(unknown)}")

    found: dict[LassoTrace, None] = {}

    def labels(path: list[str]) -> tuple[frozenset, ...]:
        return tuple(k.labels[s] for s in path)

    def add(prefix_path: list[str], loop_path: list[str]) -> None:
        t = LassoTrace(labels(prefix_path), labels(loop_path)).canonical()
        if t not in found:
            if len(found) >= max_traces:
                raise SizeLimitExceeded(
                    f"universe exceeds {max_traces} traces; raise the cap or "
                    f"tighten the bounds"
                )
            found[t] = None

    def loops_from(start_candidates: list[str], prefix_path: list[str]) -> None:
        for length in range(1, max_loop + 1):
            for first in start_candidates:
                if allowed is not None and first not in allowed:
                    continue
                _extend_loop(prefix_path, [first], length)

    def _extend_loop(prefix_path: list[str], loop_path: list[str], length: int) -> None:
        if len(loop_path) == length:
            if loop_path[0] in k.transitions[loop_path[-1]]:
                add(prefix_path, loop_path)
            return
        for nxt in k.transitions[loop_path[-1]]:
            if allowed is not None and nxt not in allowed:
                continue
            _extend_loop(prefix_path, loop_path + [nxt], length)

    def prefixes(path: list[str], remaining: int) -> None:
        # a lasso with this exact prefix: loop starts at a successor
        loops_from(list(k.transitions[path[-1]]), path)
        if remaining > 0:
            for nxt in k.transitions[path[-1]]:
                prefixes(path + [nxt], remaining - 1)

    # empty prefix: the loop must start at the initial state
    loops_from([k.initial], [])
    if max_prefix >= 1:
        prefixes([k.initial], max_prefix - 1)

    if not found:
        warnings.warn(
            "generated universe is empty under the given bounds", stacklevel=2
        )
    note = (
        f"generated(max_prefix={max_prefix}, max_loop={max_loop}"
        + (f", loop_states={sorted(allowed)}" if allowed is not None else "")
        + ")"
    )
    traces = tuple(found)
    return TraceUniverse(traces, tuple("model" for _ in traces), note)


def is_model_trace(kripke, trace: LassoTrace) -> bool:
    """True iff the denoted word is the label sequence of some initial path.

    Product construction: pair the structure with the word's position automaton
    (prefix positions, then loop positions cycling) and ask whether an infinite
    path exists from the start, i.e. whether the start can reach a cycle in the
    reachable, label-consistent product graph.
    """
    t = trace.canonical()
    p, l = len(t.prefix), len(t.loop)

    def letter(pos: int) -> frozenset:
        return t.prefix[pos] if pos < p else t.loop[(pos - p) % l]

    def next_pos(pos: int) -> int:
        n = pos + 1
        if n < p + l:
            return n
        return p + ((n - p) % l)

    start = (kripke.initial, 0)
    if kripke.labels[kripke.initial] != letter(0):
        return False
    # forward reachability
    reach = {start}
    frontier = [start]
    while frontier:
        s, pos = frontier.pop()
        np = next_pos(pos)
        want = letter(np)
        for s2 in kripke.transitions[s]:
            if kripke.labels[s2] == want and (s2, np) not in reach:
                reach.add((s2, np))
                frontier.append((s2, np))
    # trim nodes without successors inside the reachable subgraph
    def succs(node):
        s, pos = node
        np = next_pos(pos)
        want = letter(np)
        return [
            (s2, np)
            for s2 in kripke.transitions[s]
            if kripke.labels[s2] == want and (s2, np) in live
        ]

    live = set(reach)
    changed = True
    while changed:
        changed = False
        for node in list(live):
            if not succs(node):
                live.discard(node)
                changed = True
    return start in live


def add_trace(universe: TraceUniverse, trace: LassoTrace, system=None) -> TraceUniverse:
    """Universe with `trace` appended (no-op if the word is already present).

    When `system` is given, the trace must be realizable as an initial path of
    its structure; otherwise :class:`NotAPathOfModel` is raised.
    """
    if system is not None:
        k = getattr(system, "kripke", system)
        if not is_model_trace(k, trace):
            raise NotAPathOfModel(
                f"not an initial path of the model: {format_trace(trace)}"
            )
    c = trace.canonical()
    if any(t.canonical() == c for t in universe.traces):
        return universe
    return TraceUniverse(
        universe.traces + (c,),
        universe.origins + ("user" if system is None else "model",),
        universe.provenance,
    )
