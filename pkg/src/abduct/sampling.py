"""Multiplicative Chernoff bounds and the sample sizes derived from them.

All logarithms are natural.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass


class SampleBudgetWarning(UserWarning):
    pass


def _check_tail_args(p: float, gamma: float, m: float) -> None:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"mean p={p} outside (0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    if m < 1:
        raise ValueError(f"need m >= 1 trials, got {m}")


def chernoff_upper_tail(p: float, gamma: float, m: float) -> float:
    """Bound on Pr[mean of m [0,1]-variables > (1 + gamma) p]."""
    _check_tail_args(p, gamma, m)
    return math.exp(-m * p * gamma**2 / 3)


def chernoff_lower_tail(p: float, gamma: float, m: float) -> float:
    """Bound on Pr[mean of m [0,1]-variables < (1 - gamma) p]."""
    _check_tail_args(p, gamma, m)
    return math.exp(-m * p * gamma**2 / 2)


def solve_log_inequality(a: float) -> float:
    """Return x = 2 a ln a, which satisfies x >= a ln x whenever a >= 2."""
    if a < 2:
        raise ValueError(f"a={a} < 2: 2a ln a is not a valid witness there")
    return 2 * a * math.log(a)


def term_count(n: int, k: int) -> int:
    """Number of non-empty, non-contradictory terms with at most k literals."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    return sum(math.comb(n, i) * 2**i for i in range(1, k + 1))


def binomial_prefix(n: int, k: int) -> int:
    """sum_{i=0..k} C(n, i)."""
    return sum(math.comb(n, i) for i in range(0, k + 1))


def filter_threshold(mu: float, epsilon: float, m: int) -> int:
    """Largest bad-example count a term may have and survive the filter."""
    return math.floor(round(mu * epsilon * m, 9))


def cover_target(mu: float, m: int) -> int:
    return math.ceil(round(mu * m, 9))


def algorithm_samples(mu: float, gamma: float, log_term: float) -> float:
    """(6 / mu gamma^2) L ln((3 / gamma^2) L) for L = ln(2 |T|^r / delta)."""
    return 6.0 / (mu * gamma**2) * log_term * math.log(3.0 / gamma**2 * log_term)


def filter_samples(mu: float, gamma: float, delta_prime: float) -> float:
    """(12 / mu gamma^2) ln(1 / delta'), the per-term filter requirement."""
    return 12.0 / (mu * gamma**2) * math.log(1.0 / delta_prime)


@dataclass(frozen=True)
class AbductionParams:
    mu: float
    epsilon: float
    gamma: float
    delta: float
    k: int
    r: int
    n: int

    def __post_init__(self):
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"mu={self.mu} outside (0, 1]")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon={self.epsilon} outside (0, 1)")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma={self.gamma} outside (0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta={self.delta} outside (0, 1)")
        if self.r < 1:
            raise ValueError(f"r={self.r} must be >= 1")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    term_count_T: int
    log_term: float
    m_algorithm: int
    m_filter: int
    m_theoretical: int
    m: int
    capped: bool
    delta_prime: float
    filter_threshold: int
    cover_target: int

    def to_dict(self) -> dict:
        return asdict(self)


def required_samples(params: AbductionParams, budget: int | None = None) -> DerivedParams:
    """Sample size for the given parameters.

    Takes the larger of the algorithm's stated m and the per-term filter
    requirement.  With a ``budget``, m is capped and a
    :class:`SampleBudgetWarning` is issued; the uncapped value is kept in
    ``m_theoretical``.
    """
    T = term_count(params.n, params.k)
    # ln(2 |T|^r / delta) without forming |T|^r
    log_term = math.log(2) + params.r * math.log(T) - math.log(params.delta)
    delta_prime = params.delta / (2 * binomial_prefix(2 * params.n, params.k) + 4)
    raw_alg = algorithm_samples(params.mu, params.gamma, log_term)
    raw_filter = filter_samples(params.mu, params.gamma, delta_prime)
    if not (math.isfinite(raw_alg) and math.isfinite(raw_filter)):
        raise OverflowError("sample size is not representable")
    m_alg = math.ceil(raw_alg)
    m_filter = math.ceil(raw_filter)
    m_theory = max(m_alg, m_filter, 1)
    m = m_theory
    capped = False
    if budget is not None and m_theory > budget:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        warnings.warn(
            f"theoretical sample size {m_theory} exceeds budget {budget}; using {budget}",
            SampleBudgetWarning,
            stacklevel=2,
        )
        m, capped = budget, True
    return DerivedParams(
        term_count_T=T,
        log_term=log_term,
        m_algorithm=m_alg,
        m_filter=m_filter,
        m_theoretical=m_theory,
        m=m,
        capped=capped,
        delta_prime=delta_prime,
        filter_threshold=filter_threshold(params.mu, params.epsilon, m),
        cover_target=cover_target(params.mu, m),
    )


def error_ceiling(r_prime: int, gamma: float, epsilon: float) -> float:
    """Explicit conditional-error bound r' (1 + gamma) eps / (1 - gamma)."""
    if gamma >= 1.0:
        return math.inf
    return r_prime * (1 + gamma) * epsilon / (1 - gamma)


def greedy_size_bound(r: int, target: int) -> float:
    """r ln(target) + 1: allowance for the greedy partial cover size."""
    if target <= 0:
        return 0.0
    return r * math.log(target) + 1
