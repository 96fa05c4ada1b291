"""Formula ASTs, parser, printer, and desugaring for the logic.

The logic is linear-time temporal logic with past operators, extended with a
per-agent knowledge operator ``K[a]`` (synchronous perfect recall) and four
Lewis-style counterfactual operators: ``WOULD[a]`` / ``MIGHT[a]`` and their
chain-quantified variants ``UWOULD[a]`` / ``EMIGHT[a]``.

Concrete syntax is plain ASCII.  Grammar, loosest to tightest binding::

    iff   := impl ('<->' impl)*                 left associative
    impl  := or ('->' or)*                      right associative
    or    := and ('|' and)*
    and   := cf ('&' cf)*
    cf    := until (CFOP '[' agent ']' until)?  CFOP: WOULD MIGHT UWOULD EMIGHT
    until := unary (('U' | 'S') unary)*         right associative
    unary := ('!' | 'X' | 'F' | 'G' | 'Y' | 'O' | 'H' | 'K' '[' agent ']') unary
           | atom
    atom  := 'true' | 'false' | ident | ident '@' ident | '(' iff ')'

Counterfactual operators do not associate: nesting one under another requires
parentheses.  A traced atom ``p@pi`` reads proposition ``p`` on the trace bound
to the variable ``pi``; traced atoms only make sense inside relational
(similarity) formulas, which are evaluated over zipped traces.

The core fragment (what the evaluators consume) is: constants, atoms, traced
atoms, Not, And, Next, Until, Prev, Since, Know, Would, UWould.  Everything
else is surface sugar preserved by the parser for round-trip printing and
removed by :func:`desugar`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------


class Formula:
    """Base class for all formula nodes.  Nodes are immutable and hashable."""

    __slots__ = ()


# -- core nodes --


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


@dataclass(frozen=True)
class FalseConst(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TracedAtom(Formula):
    """Proposition `name` read on the trace bound to variable `trace_var`."""

    name: str
    trace_var: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Prev(Formula):
    """Previous-step operator (`Y`); false at the first position of a trace."""

    child: Formula


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    """`K[agent] child`: child holds on every observation-equivalent trace."""

    agent: str
    child: Formula


@dataclass(frozen=True)
class Would(Formula):
    """Lewis counterfactual `ante WOULD[agent] cons` (variably strict, no
    limit assumption): either no accessible trace satisfies the antecedent, or
    some accessible antecedent trace bounds a similarity threshold below which
    the antecedent forces the consequent."""

    agent: str
    ante: Formula
    cons: Formula


@dataclass(frozen=True)
class UWould(Formula):
    """Chain-wise counterfactual `ante UWOULD[agent] cons`: every accessible
    antecedent trace is at least as far as some threshold antecedent trace
    below which the antecedent forces the consequent."""

    agent: str
    ante: Formula
    cons: Formula


# -- surface (derived) nodes --


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Globally(Formula):
    child: Formula


@dataclass(frozen=True)
class Once(Formula):
    child: Formula


@dataclass(frozen=True)
class Historically(Formula):
    child: Formula


@dataclass(frozen=True)
class Might(Formula):
    """Dual of Would: `ante MIGHT[agent] cons` == `!(ante WOULD[agent] !cons)`."""

    agent: str
    ante: Formula
    cons: Formula


@dataclass(frozen=True)
class EMight(Formula):
    """Dual of UWould: `ante EMIGHT[agent] cons` == `!(ante UWOULD[agent] !cons)`."""

    agent: str
    ante: Formula
    cons: Formula


_CORE_KINDS = (
    TrueConst,
    FalseConst,
    Atom,
    TracedAtom,
    Not,
    And,
    Next,
    Until,
    Prev,
    Since,
    Know,
    Would,
    UWould,
)


def is_core(f: Formula) -> bool:
    """True iff `f` contains no derived (surface) operators."""
    if not isinstance(f, _CORE_KINDS):
        return False
    return all(is_core(c) for c in children(f))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Next, Prev, Eventually, Globally, Once, Historically)):
        return (f.child,)
    if isinstance(f, Know):
        return (f.child,)
    if isinstance(f, (And, Or, Implies, Iff, Until, Since)):
        return (f.left, f.right)
    if isinstance(f, (Would, UWould, Might, EMight)):
        return (f.ante, f.cons)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Postorder traversal of distinct subformulas (structural dedup)."""
    seen: set[Formula] = set()

    def walk(g: Formula) -> Iterator[Formula]:
        for c in children(g):
            yield from walk(c)
        if g not in seen:
            seen.add(g)
            yield g

    yield from walk(f)


def node_count(f: Formula) -> int:
    return 1 + sum(node_count(c) for c in children(f))


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------


def desugar(f: Formula) -> Formula:
    """Rewrite derived operators into the core fragment.

    Identities used:
      a | b        == !(!a & !b)
      a -> b       == !(a & !b)
      a <-> b      == (a -> b) & (b -> a)
      F a          == true U a
      G a          == !F !a
      O a          == true S a
      H a          == !O !a
      MIGHT[g]     == !(ante WOULD[g] !cons)
      EMIGHT[g]    == !(ante UWOULD[g] !cons)

    Idempotent: core formulas are returned unchanged (same structure).
    """
    if isinstance(f, (TrueConst, FalseConst, Atom, TracedAtom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.child))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Next):
        return Next(desugar(f.child))
    if isinstance(f, Until):
        return Until(desugar(f.left), desugar(f.right))
    if isinstance(f, Prev):
        return Prev(desugar(f.child))
    if isinstance(f, Since):
        return Since(desugar(f.left), desugar(f.right))
    if isinstance(f, Know):
        return Know(f.agent, desugar(f.child))
    if isinstance(f, Would):
        return Would(f.agent, desugar(f.ante), desugar(f.cons))
    if isinstance(f, UWould):
        return UWould(f.agent, desugar(f.ante), desugar(f.cons))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Implies):
        return Not(And(desugar(f.left), Not(desugar(f.right))))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return And(Not(And(a, Not(b))), Not(And(b, Not(a))))
    if isinstance(f, Eventually):
        return Until(TrueConst(), desugar(f.child))
    if isinstance(f, Globally):
        return Not(Until(TrueConst(), Not(desugar(f.child))))
    if isinstance(f, Once):
        return Since(TrueConst(), desugar(f.child))
    if isinstance(f, Historically):
        return Not(Since(TrueConst(), Not(desugar(f.child))))
    if isinstance(f, Might):
        return Not(Would(f.agent, desugar(f.ante), Not(desugar(f.cons))))
    if isinstance(f, EMight):
        return Not(UWould(f.agent, desugar(f.ante), Not(desugar(f.cons))))
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    """Syntax error with 1-based line/column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


_KEYWORDS = frozenset(
    ["true", "false", "U", "S", "X", "F", "G", "Y", "O", "H", "K",
     "WOULD", "MIGHT", "UWOULD", "EMIGHT"]
)

_UNARY_TEMPORAL = {
    "X": Next,
    "F": Eventually,
    "G": Globally,
    "Y": Prev,
    "O": Once,
    "H": Historically,
}

_CF_OPS = {"WOULD": Would, "MIGHT": Might, "UWOULD": UWould, "EMIGHT": EMight}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'ident', 'kw', 'punct', 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("<->", i):
            toks.append(_Token("punct", "<->", line, col))
            i += 3
            col += 3
            continue
        if text.startswith("->", i):
            toks.append(_Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if c in "()[]@!&|":
            toks.append(_Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "ident"
            toks.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent, one level per precedence tier)
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def next(self) -> _Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    def expect(self, text: str) -> _Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def agent_name(self) -> str:
        self.expect("[")
        t = self.peek()
        if t.kind != "ident":
            raise self.error("expected an agent name")
        self.next()
        self.expect("]")
        return t.text

    # precedence tiers, loosest first

    def iff(self) -> Formula:
        f = self.impl()
        while self.peek().text == "<->":
            self.next()
            f = Iff(f, self.impl())
        return f

    def impl(self) -> Formula:
        f = self.disj()
        if self.peek().text == "->":
            self.next()
            return Implies(f, self.impl())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek().text == "|":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.cf()
        while self.peek().text == "&":
            self.next()
            f = And(f, self.cf())
        return f

    def cf(self) -> Formula:
        f = self.until()
        t = self.peek()
        if t.kind == "kw" and t.text in _CF_OPS:
            self.next()
            agent = self.agent_name()
            rhs = self.until()
            after = self.peek()
            if after.kind == "kw" and after.text in _CF_OPS:
                raise self.error(
                    "counterfactual operators do not associate; parenthesize"
                )
            return _CF_OPS[t.text](agent, f, rhs)
        return f

    def until(self) -> Formula:
        f = self.unary()
        t = self.peek()
        if t.kind == "kw" and t.text in ("U", "S"):
            self.next()
            rhs = self.until()  # right associative
            return (Until if t.text == "U" else Since)(f, rhs)
        return f

    def unary(self) -> Formula:
        t = self.peek()
        if t.text == "!":
            self.next()
            return Not(self.unary())
        if t.kind == "kw" and t.text in _UNARY_TEMPORAL:
            self.next()
            return _UNARY_TEMPORAL[t.text](self.unary())
        if t.kind == "kw" and t.text == "K":
            self.next()
            agent = self.agent_name()
            return Know(agent, self.unary())
        return self.atom()

    def atom(self) -> Formula:
        t = self.peek()
        if t.text == "(":
            self.next()
            f = self.iff()
            self.expect(")")
            return f
        if t.kind == "kw" and t.text == "true":
            self.next()
            return TrueConst()
        if t.kind == "kw" and t.text == "false":
            self.next()
            return FalseConst()
        if t.kind == "ident":
            self.next()
            if self.peek().text == "@":
                self.next()
                v = self.peek()
                if v.kind != "ident":
                    raise self.error("expected a trace variable after '@'")
                self.next()
                return TracedAtom(t.text, v.text)
            return Atom(t.text)
        raise self.error(f"expected a formula, found {t.text or 'end of input'!r}")


def parse(text: str) -> Formula:
    """Parse concrete syntax into an AST, preserving surface operators.

    Raises :class:`ParseError` with line/column on malformed input.
    """
    p = _Parser(text)
    f = p.iff()
    t = p.peek()
    if t.kind != "eof":
        raise p.error(f"unexpected trailing input {t.text!r}")
    return f


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# precedence levels; higher binds tighter
_P_IFF, _P_IMPL, _P_OR, _P_AND, _P_CF, _P_UNTIL, _P_UNARY, _P_ATOM = range(8)


def _prec(f: Formula) -> int:
    if isinstance(f, Iff):
        return _P_IFF
    if isinstance(f, Implies):
        return _P_IMPL
    if isinstance(f, Or):
        return _P_OR
    if isinstance(f, And):
        return _P_AND
    if isinstance(f, (Would, Might, UWould, EMight)):
        return _P_CF
    if isinstance(f, (Until, Since)):
        return _P_UNTIL
    if isinstance(
        f, (Not, Next, Eventually, Globally, Prev, Once, Historically, Know)
    ):
        return _P_UNARY
    return _P_ATOM


def to_source(f: Formula) -> str:
    """Render `f` in canonical concrete syntax; `parse(to_source(f)) == f`."""
    return _render(f, 0)


def _render(f: Formula, ctx: int) -> str:
    p = _prec(f)
    s = _render_at(f, p)
    if p < ctx:
        return f"({s})"
    return s


def _render_at(f: Formula, p: int) -> str:
    if isinstance(f, TrueConst):
        return "true"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, TracedAtom):
        return f"{f.name}@{f.trace_var}"
    if isinstance(f, Iff):  # left associative
        return f"{_render(f.left, p)} <-> {_render(f.right, p + 1)}"
    if isinstance(f, Implies):  # right associative
        return f"{_render(f.left, p + 1)} -> {_render(f.right, p)}"
    if isinstance(f, Or):
        return f"{_render(f.left, p)} | {_render(f.right, p + 1)}"
    if isinstance(f, And):
        return f"{_render(f.left, p)} & {_render(f.right, p + 1)}"
    if isinstance(f, (Would, Might, UWould, EMight)):
        op = {Would: "WOULD", Might: "MIGHT", UWould: "UWOULD", EMight: "EMIGHT"}[
            type(f)
        ]
        # non-associative: both operands live one level up (until tier)
        return f"{_render(f.ante, p + 1)} {op}[{f.agent}] {_render(f.cons, p + 1)}"
    if isinstance(f, (Until, Since)):  # right associative
        op = "U" if isinstance(f, Until) else "S"
        return f"{_render(f.left, p + 1)} {op} {_render(f.right, p)}"
    if isinstance(f, Not):
        return f"!{_render(f.child, p)}"
    if isinstance(f, (Next, Eventually, Globally, Prev, Once, Historically)):
        op = {
            Next: "X",
            Eventually: "F",
            Globally: "G",
            Prev: "Y",
            Once: "O",
            Historically: "H",
        }[type(f)]
        return f"{op} {_render(f.child, p)}"
    if isinstance(f, Know):
        return f"K[{f.agent}] {_render(f.child, p)}"
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# Relational (similarity) formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationalViolation:
    kind: str  # 'forbidden-operator' | 'undeclared-trace-variable' | 'untraced-atom'
    detail: str
    path: str


class RelationalFormulaError(ValueError):
    """Raised when a formula is not a valid relational (similarity) formula."""

    def __init__(self, violations: list[RelationalViolation]):
        self.violations = tuple(violations)
        lines = "; ".join(f"{v.kind}: {v.detail} at {v.path}" for v in violations)
        super().__init__(f"not a relational formula: {lines}")


@dataclass(frozen=True)
class RelationalFormula:
    """A formula over a fixed tuple of trace variables, evaluated on zipped
    traces.  Restricted to traced atoms, boolean connectives, and temporal
    operators: no Know, no counterfactuals, no plain atoms."""

    params: tuple[str, str, str]
    formula: Formula


def validate_relational(f: Formula, params: tuple[str, str, str]) -> RelationalFormula:
    """Check the relational restrictions and wrap `f` with its parameters.

    Raises :class:`RelationalFormulaError` listing every offending node.
    """
    if len(set(params)) != len(params):
        raise ValueError(f"duplicate trace parameters: {params!r}")
    violations: list[RelationalViolation] = []

    def walk(g: Formula, path: str) -> None:
        if isinstance(g, (Know,)):
            violations.append(
                RelationalViolation("forbidden-operator", "K", path)
            )
        elif isinstance(g, (Would, Might, UWould, EMight)):
            op = {Would: "WOULD", Might: "MIGHT", UWould: "UWOULD", EMight: "EMIGHT"}[
                type(g)
            ]
            violations.append(RelationalViolation("forbidden-operator", op, path))
        elif isinstance(g, Atom):
            violations.append(RelationalViolation("untraced-atom", g.name, path))
        elif isinstance(g, TracedAtom) and g.trace_var not in params:
            violations.append(
                RelationalViolation(
                    "undeclared-trace-variable", g.trace_var, path
                )
            )
        kids = children(g)
        if len(kids) == 1:
            walk(kids[0], f"{path}.child")
        elif len(kids) == 2:
            walk(kids[0], f"{path}.left")
            walk(kids[1], f"{path}.right")

    walk(f, "root")
    if violations:
        raise RelationalFormulaError(violations)
    return RelationalFormula(tuple(params), f)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def conjoin(parts: list[Formula]) -> Formula:
    """Left-associative conjunction of `parts`; `true` when empty."""
    if not parts:
        return TrueConst()
    f = parts[0]
    for g in parts[1:]:
        f = And(f, g)
    return f


def disjoin(parts: list[Formula]) -> Formula:
    """Left-associative disjunction of `parts`; `false` when empty."""
    if not parts:
        return FalseConst()
    f = parts[0]
    for g in parts[1:]:
        f = Or(f, g)
    return f


def build_minimal_antecedent(
    conjuncts: list[Formula], consequent: Formula, agent: str
) -> Formula:
    """Assert that the whole conjunction could lead to the consequent while no
    proper nonempty sub-conjunction could::

        (c1 & ... & cn MIGHT[a] psi)
          & !(S MIGHT[a] psi)   for every nonempty proper subset S

    Subsets are enumerated by ascending size, then by index order, so the
    output is deterministic.  The result contains exactly 2^n - 1 MIGHT
    occurrences for n conjuncts.
    """
    n = len(conjuncts)
    if n == 0:
        raise ValueError("need at least one conjunct")
    parts: list[Formula] = [Might(agent, conjoin(conjuncts), consequent)]
    subsets: list[tuple[int, ...]] = []
    for size in range(1, n):
        subsets.extend(_index_subsets(n, size))
    for idxs in subsets:
        sub = conjoin([conjuncts[i] for i in idxs])
        parts.append(Not(Might(agent, sub, consequent)))
    return conjoin(parts)


def _index_subsets(n: int, size: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    return list(combinations(range(n), size))
