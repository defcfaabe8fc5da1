"""Slow reference implementations for cross-checking the pipeline.

Nothing here calls the proof engines, the coverage matrix or the greedy cover.
Derivations are recomputed as plain clause-set closures, queries are judged
by Kleene three-valued evaluation, and cover sizes come from exhaustive
search.  Only the formula and literal types are shared.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .formula import And, Const, Formula, Not, Or, Term, Var
from .proofsys import KnowledgeBase, ProofEngine


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    max_n: int = 12
    max_m: int = 2000
    max_terms: int = 24

    def __post_init__(self):
        if min(self.max_n, self.max_m, self.max_terms) < 1:
            raise ValueError("oracle limits must be positive")


DEFAULT = OracleConfig()

# literal as (attr, negated); clause as frozenset of such pairs


def _closure(kb: KnowledgeBase, rho: Sequence[int], engine: ProofEngine) -> set[frozenset]:
    facts = {frozenset({(a, v == 0)}) for a, v in enumerate(rho) if v in (0, 1)}
    if engine.kind == "witnessed":
        return facts
    clauses = set(facts)
    clauses |= {frozenset((l.attr, l.negated) for l in c.literals) for c in kb.clauses}
    width = engine.width if engine.kind == "resolution" else 0
    changed = True
    while changed and frozenset() not in clauses:
        changed = False
        snapshot = list(clauses)
        for c1, c2 in itertools.product(snapshot, snapshot):
            for a, neg in c1:
                if (a, not neg) not in c2:
                    continue
                res = (c1 - {(a, neg)}) | (c2 - {(a, not neg)})
                if any((b, not s) in res for b, s in res):
                    continue
                unit_step = len(c1) == 1
                if not unit_step and len(res) > width:
                    continue
                if res not in clauses:
                    clauses.add(res)
                    changed = True
    return clauses


def _units(clauses: set[frozenset]) -> dict[int, int] | None:
    """Attribute values forced by unit clauses, or None on the empty clause."""
    if frozenset() in clauses:
        return None
    values = {}
    for c in clauses:
        if len(c) == 1:
            (a, neg), = c
            values[a] = 0 if neg else 1
    return values


def _kleene(f: Formula, values: dict[int, int]) -> int | None:
    if isinstance(f, Const):
        return int(f.value)
    if isinstance(f, Var):
        return values.get(f.attr)
    if isinstance(f, Not):
        v = _kleene(f.arg, values)
        return None if v is None else 1 - v
    if isinstance(f, And):
        vals = [_kleene(g, values) for g in f.args]
        if 0 in vals:
            return 0
        return 1 if all(v == 1 for v in vals) else None
    if isinstance(f, Or):
        vals = [_kleene(g, values) for g in f.args]
        if 1 in vals:
            return 1
        return 0 if all(v == 0 for v in vals) else None
    raise TypeError(f"not a formula: {f!r}")


def oracle_term_provable(kb: KnowledgeBase, t: Term, rho: Sequence[int], engine: ProofEngine) -> bool:
    units = _units(_closure(kb, rho, engine))
    if units is None:
        return True
    return all(units.get(l.attr) == (0 if l.negated else 1) for l in t.literals)


def exact_filter_counts(
    terms: Sequence[Term],
    kb: KnowledgeBase,
    c: Formula,
    rows: Sequence[Sequence[int]],
    engine: ProofEngine,
    config: OracleConfig = DEFAULT,
) -> list[int]:
    """#{rows where term and ~c are both provable}, one term and row at a time."""
    rows = list(getattr(rows, "rows", rows))
    if kb.n > config.max_n or len(rows) > config.max_m:
        raise OracleLimitError(f"instance exceeds oracle limits {config}")
    counts = [0] * len(terms)
    for rho in rows:
        units = _units(_closure(kb, rho, engine))
        for j, t in enumerate(terms):
            if units is None:
                counts[j] += 1
                continue
            t_ok = all(units.get(l.attr) == (0 if l.negated else 1) for l in t.literals)
            if t_ok and _kleene(c, units) == 0:
                counts[j] += 1
    return counts


def optimal_partial_cover(sets: Sequence[Iterable[int]], target: int, config: OracleConfig = DEFAULT) -> int | None:
    """Fewest sets whose union has at least ``target`` elements; None if infeasible."""
    if len(sets) > config.max_terms:
        raise OracleLimitError(f"{len(sets)} sets exceed max_terms={config.max_terms}")
    if target <= 0:
        return 0
    frozen = sorted((frozenset(s) for s in sets), key=len, reverse=True)
    if len(frozenset().union(*frozen)) < target:
        return None
    sizes = [len(s) for s in frozen]

    def search(start: int, covered: frozenset, left: int) -> bool:
        if len(covered) >= target:
            return True
        if left == 0 or start >= len(frozen):
            return False
        # sets are sorted by size, so no later pick adds more than sizes[start]
        if len(covered) + left * sizes[start] < target:
            return False
        for i in range(start, len(frozen)):
            if len(covered) + left * sizes[i] < target:
                return False
            if search(i + 1, covered | frozen[i], left - 1):
                return True
        return False

    for size in range(1, len(frozen) + 1):
        if search(0, frozenset(), size):
            return size
    return None


def _satisfies(clauses, assignment: Sequence[int]) -> bool:
    for c in clauses:
        if not any((assignment[l.attr] == 0) == l.negated for l in c.literals):
            return False
    return True


def semantic_provability(kb: KnowledgeBase, t: Term, rho: Sequence[int], config: OracleConfig = DEFAULT) -> bool:
    """Does every KB-model completing ``rho`` satisfy ``t``?  (Vacuously true if none.)"""
    if kb.n > config.max_n:
        raise OracleLimitError(f"n={kb.n} exceeds max_n={config.max_n}")
    hidden = [a for a, v in enumerate(rho) if v not in (0, 1)]
    base = list(rho)
    for bits in itertools.product((0, 1), repeat=len(hidden)):
        for a, b in zip(hidden, bits):
            base[a] = b
        if not _satisfies(kb.clauses, base):
            continue
        if not all((base[l.attr] == 0) == l.negated for l in t.literals):
            return False
    return True
