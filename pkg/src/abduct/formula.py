"""Boolean formulas over tri-valued partial assignments.

Formulas are small immutable ASTs.  ``restrict`` plugs the observed values of a
partial example into a formula and folds constants; a formula is *witnessed*
when that folding leaves a bare constant.  No other rewriting is done, so the
check stays linear in the size of the formula.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class TriValue(enum.IntEnum):
    FALSE = 0
    TRUE = 1
    UNOBSERVED = 2

    @property
    def symbol(self) -> str:
        return "01*"[self]

    @classmethod
    def parse(cls, ch: str) -> "TriValue":
        try:
            return _SYMBOLS[ch]
        except KeyError:
            raise ValueError(f"illegal cell value {ch!r}") from None


_SYMBOLS = {
    "0": TriValue.FALSE,
    "1": TriValue.TRUE,
    "*": TriValue.UNOBSERVED,
    "?": TriValue.UNOBSERVED,
}

# Rows are plain tuples of 0/1/2 ints; TriValue members compare equal to them.
UNOBSERVED = int(TriValue.UNOBSERVED)


class Witness(enum.Enum):
    TRUE = "witnessed_true"
    FALSE = "witnessed_false"
    NONE = "not_witnessed"


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "1" if self.value else "0"


@dataclass(frozen=True)
class Var:
    attr: int

    def __str__(self) -> str:
        return f"x{self.attr + 1}"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        inner = str(self.arg)
        if isinstance(self.arg, (And, Or)):
            inner = f"({inner})"
        return f"~{inner}"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]

    def __str__(self) -> str:
        return " & ".join(f"({a})" if isinstance(a, Or) else str(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]

    def __str__(self) -> str:
        return " | ".join(str(a) for a in self.args)


Formula = Union[Const, Var, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


def variables(f: Formula) -> set[int]:
    out: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.attr)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
    return out


# ---------------------------------------------------------------------------
# Literals, terms, k-DNFs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Literal:
    """``x_attr`` or its negation.  Ordered by attribute, positive first."""

    attr: int
    negated: bool = False

    def __neg__(self) -> "Literal":
        return Literal(self.attr, not self.negated)

    def value_under(self, row: Sequence[int]) -> int:
        """TRUE/FALSE/UNOBSERVED value of the literal under a partial row."""
        v = row[self.attr]
        if v == UNOBSERVED or not self.negated:
            return v
        return 1 - v

    def to_formula(self) -> Formula:
        return Not(Var(self.attr)) if self.negated else Var(self.attr)

    def __str__(self) -> str:
        return f"~x{self.attr + 1}" if self.negated else f"x{self.attr + 1}"


@dataclass(frozen=True, order=True)
class Term:
    """A conjunction of literals over distinct attributes, kept sorted.

    Build with :meth:`of` so the canonical order is enforced; equality,
    hashing and ordering are then structural on the literal tuple.
    """

    literals: tuple[Literal, ...]

    @classmethod
    def of(cls, literals: Iterable[Literal]) -> "Term":
        lits = tuple(sorted(set(literals)))
        if not lits:
            raise ValueError("a term needs at least one literal")
        attrs = [lit.attr for lit in lits]
        if len(set(attrs)) != len(attrs):
            raise ValueError(f"term mentions an attribute twice: {' & '.join(map(str, lits))}")
        return cls(lits)

    @property
    def width(self) -> int:
        return len(self.literals)

    def to_formula(self) -> Formula:
        if len(self.literals) == 1:
            return self.literals[0].to_formula()
        return And(tuple(lit.to_formula() for lit in self.literals))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __str__(self) -> str:
        return " & ".join(map(str, self.literals))


@dataclass(frozen=True)
class KDnf:
    terms: tuple[Term, ...]
    k: int

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("k-DNF terms must be distinct")
        for t in self.terms:
            if t.width > self.k:
                raise ValueError(f"term {t} is wider than k={self.k}")

    def to_formula(self) -> Formula:
        if not self.terms:
            return FALSE
        if len(self.terms) == 1:
            return self.terms[0].to_formula()
        return Or(tuple(t.to_formula() for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        if len(self.terms) == 1:
            return str(self.terms[0])
        return " | ".join(f"({t})" if t.width > 1 else str(t) for t in self.terms)


def term_from_formula(f: Formula) -> Term:
    """Read a conjunction of literals (as produced by ``parse_formula``) as a Term."""
    parts = f.args if isinstance(f, And) else (f,)
    lits = []
    for p in parts:
        if isinstance(p, Var):
            lits.append(Literal(p.attr))
        elif isinstance(p, Not) and isinstance(p.arg, Var):
            lits.append(Literal(p.arg.attr, True))
        else:
            raise ValueError(f"not a conjunction of literals: {f}")
    return Term.of(lits)


def kdnf_from_formula(f: Formula, k: int | None = None) -> KDnf:
    if isinstance(f, Const) and not f.value:
        return KDnf((), k or 1)
    parts = f.args if isinstance(f, Or) else (f,)
    terms = tuple(dict.fromkeys(term_from_formula(p) for p in parts))
    width = max(t.width for t in terms)
    return KDnf(terms, width if k is None else k)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(x\d+)|([~&|()01])|(\S))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        mo = _TOKEN.match(text, pos)
        if mo is None:  # only trailing whitespace left
            break
        if mo.group(3) is not None:
            raise FormulaSyntaxError(f"unexpected character {mo.group(3)!r}", mo.start(3))
        idx = mo.lastindex
        tokens.append((mo.group(idx), mo.start(idx)))
        pos = mo.end()
    return tokens


def _check_parens(tokens: list[tuple[str, int]]) -> None:
    open_at: list[int] = []
    for tok, pos in tokens:
        if tok == "(":
            open_at.append(pos)
        elif tok == ")":
            if not open_at:
                raise FormulaSyntaxError("unbalanced parenthesis", pos)
            open_at.pop()
    if open_at:
        raise FormulaSyntaxError("unbalanced parenthesis", open_at[-1])


class _Parser:
    # precedence: ~ binds tightest, then &, then |

    def __init__(self, text: str, n: int | None):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        _check_parens(self.tokens)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def parse(self) -> Formula:
        f = self.disjunction()
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected {self.peek()!r}", self.pos())
        return f

    def disjunction(self) -> Formula:
        args = [self.conjunction()]
        while self.peek() == "|":
            self.i += 1
            args.append(self.conjunction())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conjunction(self) -> Formula:
        args = [self.unary()]
        while self.peek() == "&":
            self.i += 1
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.i += 1
            return Not(self.unary())
        if tok == "(":
            self.i += 1
            f = self.disjunction()
            if self.peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.pos())
            self.i += 1
            return f
        if tok is not None and tok.startswith("x"):
            index = int(tok[1:])
            if index < 1 or (self.n is not None and index > self.n):
                raise FormulaSyntaxError(
                    f"attribute {tok} outside x1..x{self.n}", self.pos()
                )
            self.i += 1
            return Var(index - 1)
        if tok in ("0", "1"):
            self.i += 1
            return Const(tok == "1")
        what = "end of input" if tok is None else repr(tok)
        raise FormulaSyntaxError(f"expected operand, got {what}", self.pos())


def parse_formula(text: str, n: int | None = None) -> Formula:
    """Parse ``x1 | ~(x2 & x3)`` style text.  Variables are 1-indexed in text.

    With ``n`` given, references beyond ``x<n>`` are rejected.
    """
    return _Parser(text, n).parse()


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------


def restrict(f: Formula, rho: Sequence[int]) -> Formula:
    """Return ``f`` with the observed values of ``rho`` substituted and constants folded."""
    if isinstance(f, Var):
        v = rho[f.attr]
        return f if v == UNOBSERVED else (TRUE if v else FALSE)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        g = restrict(f.arg, rho)
        if isinstance(g, Const):
            return FALSE if g.value else TRUE
        return f if g is f.arg else Not(g)
    if isinstance(f, And):
        kept = []
        for a in f.args:
            g = restrict(a, rho)
            if g == FALSE:
                return FALSE
            if g != TRUE:
                kept.append(g)
        if not kept:
            return TRUE
        return kept[0] if len(kept) == 1 else And(tuple(kept))
    if isinstance(f, Or):
        kept = []
        for a in f.args:
            g = restrict(a, rho)
            if g == TRUE:
                return TRUE
            if g != FALSE:
                kept.append(g)
        if not kept:
            return FALSE
        return kept[0] if len(kept) == 1 else Or(tuple(kept))
    raise TypeError(f"not a formula: {f!r}")


def witness_status(f: Formula, rho: Sequence[int]) -> Witness:
    g = restrict(f, rho)
    if g == TRUE:
        return Witness.TRUE
    if g == FALSE:
        return Witness.FALSE
    return Witness.NONE


def eval_total(f: Formula, assignment: Sequence[int]) -> bool:
    if any(v == UNOBSERVED for v in assignment):
        raise ValueError("eval_total needs a total assignment (found '*')")
    return _eval(f, assignment)


def _eval(f: Formula, a: Sequence[int]) -> bool:
    if isinstance(f, Var):
        return bool(a[f.attr])
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not _eval(f.arg, a)
    if isinstance(f, And):
        return all(_eval(g, a) for g in f.args)
    if isinstance(f, Or):
        return any(_eval(g, a) for g in f.args)
    raise TypeError(f"not a formula: {f!r}")
