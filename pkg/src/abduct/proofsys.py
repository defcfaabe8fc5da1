"""Restriction-closed proof engines over a clausal knowledge base.

A partial example is treated as a set of unit facts.  The engines extend it
with derived literals:

* ``witnessed``   -- nothing beyond the observed values (the KB is ignored);
* ``unitprop``    -- unit propagation over the KB restricted by the facts;
* ``resolution``  -- unit propagation interleaved with saturation under
  resolution, keeping only resolvents of width <= w.

Deriving the empty clause yields :data:`CONTRADICTION`; every query is then
considered provable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .formula import FALSE, UNOBSERVED, Formula, Literal, Term, restrict


class _Contradiction:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CONTRADICTION"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Contradiction, ())


CONTRADICTION = _Contradiction()

Derived = Union[tuple[int, ...], _Contradiction]


@dataclass(frozen=True, order=True)
class Clause:
    literals: tuple[Literal, ...]

    @classmethod
    def of(cls, literals: Iterable[Literal]) -> "Clause":
        lits = tuple(sorted(set(literals)))
        attrs = [lit.attr for lit in lits]
        if len(set(attrs)) != len(attrs):
            raise ValueError("clause mentions an attribute twice")
        return cls(lits)

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return " | ".join(map(str, self.literals)) if self.literals else "[]"


@dataclass(frozen=True)
class KnowledgeBase:
    clauses: tuple[Clause, ...]
    n: int

    def __post_init__(self):
        seen = tuple(dict.fromkeys(self.clauses))
        object.__setattr__(self, "clauses", seen)
        for c in self.clauses:
            for lit in c.literals:
                if not 0 <= lit.attr < self.n:
                    raise ValueError(f"literal {lit} outside x1..x{self.n}")
        # integer-coded copy for the engines: code = 2 * attr + negated
        object.__setattr__(
            self, "_coded", tuple(tuple(2 * l.attr + l.negated for l in c.literals) for c in self.clauses)
        )

    @classmethod
    def empty(cls, n: int) -> "KnowledgeBase":
        return cls((), n)

    @classmethod
    def from_lists(cls, clauses: Iterable[Iterable[Literal]], n: int) -> "KnowledgeBase":
        return cls(tuple(Clause.of(c) for c in clauses), n)

    def __len__(self) -> int:
        return len(self.clauses)

    def to_text(self) -> str:
        return "".join(f"{c}\n" for c in self.clauses)


def parse_kb(text: str, n: int) -> KnowledgeBase:
    """One clause per line, e.g. ``~x1 | x3``; ``#`` starts a comment."""
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lits = []
        for part in line.split("|"):
            tok = part.strip()
            neg = tok.startswith("~")
            name = tok[1:].strip() if neg else tok
            if not (name.startswith("x") and name[1:].isdigit()):
                raise ValueError(f"line {lineno}: bad literal {tok!r}")
            index = int(name[1:])
            if not 1 <= index <= n:
                raise ValueError(f"line {lineno}: {name} outside x1..x{n}")
            lits.append(Literal(index - 1, neg))
        try:
            clauses.append(Clause.of(lits))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return KnowledgeBase(tuple(clauses), n)


@dataclass(frozen=True)
class ProofEngine:
    kind: str = "unitprop"
    width: int | None = None

    KINDS = ("witnessed", "unitprop", "resolution")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown engine {self.kind!r}")
        if self.kind == "resolution":
            if self.width is None or self.width < 1:
                raise ValueError("bounded resolution needs width >= 1")
        elif self.width is not None:
            raise ValueError(f"engine {self.kind!r} takes no width")

    @classmethod
    def parse(cls, text: str, default_width: int | None = None) -> "ProofEngine":
        name, _, w = text.partition(":")
        if name == "resolution":
            return cls("resolution", int(w) if w else default_width)
        if w:
            raise ValueError(f"engine {name!r} takes no width")
        return cls(name)

    def __str__(self) -> str:
        return f"resolution:{self.width}" if self.kind == "resolution" else self.kind


WITNESSED = ProofEngine("witnessed")
UNIT_PROPAGATION = ProofEngine("unitprop")


def bounded_resolution(width: int) -> ProofEngine:
    return ProofEngine("resolution", width)


# ---------------------------------------------------------------------------
# Derivation
# ---------------------------------------------------------------------------


def _unit_propagate(coded, assign: list[int]) -> tuple[bool, int]:
    """Propagate in place.  Returns (consistent, number of passes that assigned)."""
    rounds = 0
    changed = True
    while changed:
        changed = False
        for clause in coded:
            free = -1
            nfree = 0
            for code in clause:
                v = assign[code >> 1]
                if v == UNOBSERVED:
                    nfree += 1
                    free = code
                elif v ^ (code & 1):
                    break
            else:
                if nfree == 0:
                    return False, rounds
                if nfree == 1:
                    assign[free >> 1] = 1 ^ (free & 1)
                    changed = True
        if changed:
            rounds += 1
    return True, rounds


def _restricted(coded, assign: list[int]) -> set[frozenset[int]]:
    out = set()
    for clause in coded:
        kept = []
        for code in clause:
            v = assign[code >> 1]
            if v == UNOBSERVED:
                kept.append(code)
            elif v ^ (code & 1):
                break
        else:
            out.add(frozenset(kept))
    return out


def _saturate(clauses: set[frozenset[int]], width: int) -> set[frozenset[int]] | None:
    """Close under width-bounded resolution.  None signals the empty clause."""
    if frozenset() in clauses:
        return None
    known = set(clauses)
    frontier = list(known)
    while frontier:
        c = frontier.pop()
        for d in list(known):
            for code in c:
                if code ^ 1 not in d:
                    continue
                res = (c | d) - {code, code ^ 1}
                if len(res) > width or res in known:
                    continue
                if any(x ^ 1 in res for x in res):
                    continue
                if not res:
                    return None
                known.add(res)
                frontier.append(res)
    return known


def derive_literals(kb: KnowledgeBase, rho: Sequence[int], engine: ProofEngine = UNIT_PROPAGATION) -> Derived:
    """Extend ``rho`` with everything the engine derives from ``kb`` restricted by ``rho``."""
    if len(rho) != kb.n:
        raise ValueError(f"example has {len(rho)} attributes, knowledge base has {kb.n}")
    assign = list(rho)
    if engine.kind == "witnessed":
        return tuple(assign)
    coded = kb._coded
    while True:
        ok, _ = _unit_propagate(coded, assign)
        if not ok:
            return CONTRADICTION
        if engine.kind == "unitprop":
            return tuple(assign)
        closed = _saturate(_restricted(coded, assign), engine.width)
        if closed is None:
            return CONTRADICTION
        units = [next(iter(c)) for c in closed if len(c) == 1]
        if not units:
            return tuple(assign)
        for code in units:
            assign[code >> 1] = 1 ^ (code & 1)


def propagation_rounds(kb: KnowledgeBase, rho: Sequence[int]) -> int:
    """Number of unit-propagation passes that assigned something (<= n)."""
    return _unit_propagate(kb._coded, list(rho))[1]


def term_holds(t: Term, derived: Derived) -> bool:
    if derived is CONTRADICTION:
        return True
    return all(lit.value_under(derived) == 1 for lit in t.literals)


def negation_holds(c: Formula, derived: Derived) -> bool:
    if derived is CONTRADICTION:
        return True
    return restrict(c, derived) == FALSE


def term_provable(kb: KnowledgeBase, t: Term, rho: Sequence[int], engine: ProofEngine = UNIT_PROPAGATION) -> bool:
    return term_holds(t, derive_literals(kb, rho, engine))


def neg_query_provable(kb: KnowledgeBase, c: Formula, rho: Sequence[int], engine: ProofEngine = UNIT_PROPAGATION) -> bool:
    """True when the derived assignment witnesses ``~c`` (or the KB collapses)."""
    return negation_holds(c, derive_literals(kb, rho, engine))
