"""Implicit abduction: term filtering plus greedy partial set cover.

Coverage sets are Python ints used as bitsets over example indices (bit i is
example i), so intersections are ``&`` and sizes are ``int.bit_count``.
"""
from __future__ import annotations

import enum
import itertools
import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

import numpy as np

from .dataset import Dataset
from .formula import Formula, KDnf, Literal, Term, variables
from .proofsys import (
    CONTRADICTION,
    UNIT_PROPAGATION,
    KnowledgeBase,
    ProofEngine,
    derive_literals,
    negation_holds,
)
from .sampling import AbductionParams, cover_target, error_ceiling, filter_threshold

log = logging.getLogger(__name__)


def enumerate_terms(n: int, k: int, attrs: Sequence[int] | None = None) -> list[Term]:
    """All canonical terms of 1..k literals over ``attrs`` (default: all n), sorted."""
    pool = sorted(range(n) if attrs is None else set(attrs))
    if not 1 <= k <= len(pool):
        raise ValueError(f"need 1 <= k <= {len(pool)} attributes, got k={k}")
    terms = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(pool, size):
            for signs in itertools.product((False, True), repeat=size):
                terms.append(Term(tuple(Literal(a, s) for a, s in zip(combo, signs))))
    terms.sort()
    return terms


# ---------------------------------------------------------------------------
# Bitset helpers
# ---------------------------------------------------------------------------


def to_bitset(items: Union[int, Iterable[int]]) -> int:
    if isinstance(items, int):
        return items
    bits = 0
    for i in items:
        bits |= 1 << i
    return bits


def bit_indices(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def _pack(mask: np.ndarray) -> int:
    if mask.size == 0:
        return 0
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------


@dataclass
class CoverageMatrix:
    terms: list[Term]
    provable: list[int]
    bad: list[int]
    m: int
    contradictions: int = 0

    @property
    def bad_counts(self) -> list[int]:
        return [b.bit_count() for b in self.bad]

    @property
    def provable_counts(self) -> list[int]:
        return [p.bit_count() for p in self.provable]

    def provable_set(self, i: int) -> frozenset[int]:
        return frozenset(bit_indices(self.provable[i]))


def _derive_chunk(kb: KnowledgeBase, c: Formula, engine: ProofEngine, rows: Sequence[tuple[int, ...]]):
    n = kb.n
    derived = np.full((len(rows), n), 2, dtype=np.int8)
    contra = np.zeros(len(rows), dtype=bool)
    negc = np.zeros(len(rows), dtype=bool)
    cache: dict[tuple[int, ...], tuple] = {}
    for i, row in enumerate(rows):
        hit = cache.get(row)
        if hit is None:
            d = derive_literals(kb, row, engine)
            hit = cache[row] = (d, negation_holds(c, d))
        d, nc = hit
        if d is CONTRADICTION:
            contra[i] = True
        else:
            derived[i] = d
        negc[i] = nc
    return derived, contra, negc


def derive_dataset(kb, c, dataset, engine, workers=1, executor=None):
    """One derivation pass per example; returns (derived, contradiction, neg_c) arrays."""
    rows = dataset.rows
    if executor is None and workers <= 1:
        return _derive_chunk(kb, c, engine, rows)
    nchunks = max(workers, 1) if executor is None else max(workers, 2)
    size = max(1, math.ceil(len(rows) / nchunks))
    chunks = [rows[i : i + size] for i in range(0, len(rows), size)]
    own = executor is None
    pool = ProcessPoolExecutor(max_workers=workers) if own else executor
    try:
        parts = list(pool.map(_derive_chunk, *zip(*[(kb, c, engine, ch) for ch in chunks])))
    finally:
        if own:
            pool.shutdown()
    if not parts:
        return _derive_chunk(kb, c, engine, rows)
    derived = np.concatenate([p[0] for p in parts])
    contra = np.concatenate([p[1] for p in parts])
    negc = np.concatenate([p[2] for p in parts])
    return derived, contra, negc


def build_coverage(
    terms: Sequence[Term],
    kb: KnowledgeBase,
    c: Formula,
    dataset: Dataset,
    engine: ProofEngine = UNIT_PROPAGATION,
    workers: int = 1,
    executor: Executor | None = None,
) -> CoverageMatrix:
    """Provable sets and bad sets (term provable and ~c provable) for every term.

    With ``workers > 1`` (or an explicit ``executor``) the per-example
    derivation pass is split into contiguous chunks; the result is identical
    to the serial one.
    """
    if kb.n != dataset.n:
        raise ValueError(f"knowledge base has {kb.n} attributes, dataset has {dataset.n}")
    derived, contra, negc = derive_dataset(kb, c, dataset, engine, workers, executor)
    contra_bits = _pack(contra)
    negc_bits = _pack(negc)
    lit_bits: dict[Literal, int] = {}

    def bits_of(lit: Literal) -> int:
        b = lit_bits.get(lit)
        if b is None:
            col = derived[:, lit.attr] if derived.size else np.zeros(0, dtype=np.int8)
            b = lit_bits[lit] = _pack(col == (0 if lit.negated else 1))
        return b

    provable, bad = [], []
    for t in terms:
        bits = -1
        for lit in t.literals:
            bits &= bits_of(lit)
        bits |= contra_bits
        provable.append(bits)
        bad.append(bits & negc_bits)
    return CoverageMatrix(list(terms), provable, bad, dataset.m, int(contra.sum()))


def filter_terms(matrix: CoverageMatrix, threshold: int) -> list[int]:
    """Indices of terms whose bad count does not exceed ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return [i for i, b in enumerate(matrix.bad) if b.bit_count() <= threshold]


@dataclass
class CoverOutcome:
    chosen: list[int]
    gains: list[int]
    covered: int
    success: bool


def greedy_partial_cover(sets: Sequence[Union[int, Iterable[int]]], target: int) -> CoverOutcome:
    """Greedy partial cover: repeatedly take the set adding the most new elements.

    Ties go to the lowest index, so callers order ``sets`` by priority.  Stops
    once ``target`` elements are covered, or fails when nothing adds coverage.
    """
    bitsets = [to_bitset(s) for s in sets]
    covered = 0
    count = 0
    chosen: list[int] = []
    gains: list[int] = []
    while count < target:
        best, best_gain = -1, 0
        for i, s in enumerate(bitsets):
            gain = (s & ~covered).bit_count()
            if gain > best_gain:
                best, best_gain = i, gain
        if best < 0:
            return CoverOutcome(chosen, gains, count, False)
        chosen.append(best)
        gains.append(best_gain)
        covered |= bitsets[best]
        count += best_gain
    return CoverOutcome(chosen, gains, count, True)


# ---------------------------------------------------------------------------
# Abduction
# ---------------------------------------------------------------------------


class Status(enum.Enum):
    FOUND = "Found"
    NO_PLAUSIBLE_EXPLANATION = "NoPlausibleExplanation"


@dataclass
class TermStats:
    term: Term
    coverage: int
    gain: int
    bad_count: int

    def to_dict(self) -> dict:
        return {"term": str(self.term), "coverage": self.coverage, "gain": self.gain, "bad_count": self.bad_count}


@dataclass
class AbductionResult:
    status: Status
    h: KDnf
    covered: int
    m: int
    cover_target: int
    filter_threshold: int
    term_stats: list[TermStats]
    theoretical_bound: float
    n_candidates: int
    n_survivors: int
    contradictions: int = 0
    empty_term_excluded: bool = True
    matrix: CoverageMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def r_prime(self) -> int:
        return len(self.h)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "h": str(self.h),
            "terms": [[[lit.attr, lit.negated] for lit in t.literals] for t in self.h.terms],
            "k": self.h.k,
            "r_prime": self.r_prime,
            "covered": self.covered,
            "m": self.m,
            "cover_target": self.cover_target,
            "filter_threshold": self.filter_threshold,
            "term_stats": [s.to_dict() for s in self.term_stats],
            "theoretical_bound": self.theoretical_bound if math.isfinite(self.theoretical_bound) else None,
            "n_candidates": self.n_candidates,
            "n_survivors": self.n_survivors,
            "contradictions": self.contradictions,
            "empty_term_excluded": self.empty_term_excluded,
        }


def _check_inputs(kb: KnowledgeBase, c: Formula, dataset: Dataset) -> None:
    if kb.n != dataset.n:
        raise ValueError(f"knowledge base has {kb.n} attributes, dataset has {dataset.n}")
    if dataset.m < 1:
        raise ValueError("abduction needs at least one example")
    bad = [v for v in variables(c) if v >= dataset.n]
    if bad:
        raise ValueError(f"query mentions x{bad[0] + 1} beyond the dataset's {dataset.n} attributes")


def candidate_attributes(n: int, c: Formula, exclude_query: bool) -> list[int]:
    if not exclude_query:
        return list(range(n))
    used = variables(c)
    return [a for a in range(n) if a not in used]


def _select(matrix: CoverageMatrix, params: AbductionParams) -> AbductionResult:
    m = matrix.m
    threshold = filter_threshold(params.mu, params.epsilon, m)
    target = cover_target(params.mu, m)
    survivors = [i for i in filter_terms(matrix, threshold) if matrix.provable[i]]
    outcome = greedy_partial_cover([matrix.provable[i] for i in survivors], target)
    picked = [survivors[j] for j in outcome.chosen]
    status = Status.FOUND if outcome.success else Status.NO_PLAUSIBLE_EXPLANATION
    h = KDnf(tuple(matrix.terms[i] for i in picked), params.k) if outcome.success else KDnf((), params.k)
    stats = []
    if outcome.success:
        stats = [
            TermStats(matrix.terms[i], matrix.provable[i].bit_count(), g, matrix.bad[i].bit_count())
            for i, g in zip(picked, outcome.gains)
        ]
    return AbductionResult(
        status=status,
        h=h,
        covered=outcome.covered,
        m=m,
        cover_target=target,
        filter_threshold=threshold,
        term_stats=stats,
        theoretical_bound=error_ceiling(len(h), params.gamma, params.epsilon),
        n_candidates=len(matrix.terms),
        n_survivors=len(survivors),
        contradictions=matrix.contradictions,
        matrix=matrix,
    )


def abduce(
    kb: KnowledgeBase,
    c: Formula,
    dataset: Dataset,
    params: AbductionParams,
    engine: ProofEngine = UNIT_PROPAGATION,
    exclude_query_attributes: bool = False,
    workers: int = 1,
) -> AbductionResult:
    """Find a k-DNF whose terms pass the filter and jointly cover a mu-fraction of rows.

    ``exclude_query_attributes`` keeps the query's own attributes out of the
    candidate terms, which avoids the trivial explanation "c because c" when
    the query is a data column.
    """
    _check_inputs(kb, c, dataset)
    attrs = candidate_attributes(dataset.n, c, exclude_query_attributes)
    terms = enumerate_terms(dataset.n, params.k, attrs)
    matrix = build_coverage(terms, kb, c, dataset, engine, workers=workers)
    result = _select(matrix, params)
    log.info(
        "abduce: %d terms, %d survive filter (threshold %d), status %s with %d terms",
        len(terms), result.n_survivors, result.filter_threshold, result.status.value, result.r_prime,
    )
    return result


@dataclass
class MuEstimate:
    mu: float
    found: bool
    tried: list[float]
    result: AbductionResult | None = None


def estimate_mu(
    kb: KnowledgeBase,
    c: Formula,
    dataset: Dataset,
    params: AbductionParams,
    engine: ProofEngine = UNIT_PROPAGATION,
    floor: float = 0.01,
    exclude_query_attributes: bool = False,
) -> MuEstimate:
    """Largest mu on the grid 1, (1+gamma)^-1, (1+gamma)^-2, ... (down to ``floor``)
    at which filtering and covering succeed.  ``params.mu`` is ignored.
    """
    if not 0 < floor <= 1:
        raise ValueError("floor must lie in (0, 1]")
    _check_inputs(kb, c, dataset)
    attrs = candidate_attributes(dataset.n, c, exclude_query_attributes)
    terms = enumerate_terms(dataset.n, params.k, attrs)
    matrix = build_coverage(terms, kb, c, dataset, engine)
    tried = []
    j = 0
    while True:
        mu = (1 + params.gamma) ** -j
        if mu < floor:
            break
        tried.append(mu)
        result = _select(matrix, replace(params, mu=mu))
        if result.found:
            return MuEstimate(mu, True, tried, result)
        j += 1
    return MuEstimate(floor, False, tried, None)
