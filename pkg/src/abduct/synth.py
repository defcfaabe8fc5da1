"""Planted-explanation instances for end-to-end checks.

Layout of a planted instance with ``n`` explanatory attributes:

* attributes ``0..n-1`` are explanatory; ``r`` attribute-disjoint terms of
  width ``k`` form the planted explanation ``h*``;
* some leftover attributes act as *proxies*: proxy ``j`` linked to planted
  literal ``l`` is only ever 1 when ``l`` holds, and the knowledge base gets
  the clause ``~x_j | l`` so ``l`` can be proved when hidden;
* attribute ``n`` is the query column; the query is the formula ``x_{n+1}``.

Sampling: with probability ``mu_target`` a uniformly chosen planted term is
forced true; otherwise the planted attributes are drawn from the base
distribution conditioned on no planted term holding.  The query is true when
``h*`` holds except with probability ``epsilon_star``, and an independent
coin otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, MaskProcess, default_names, mask_array
from .formula import Formula, KDnf, Literal, Term, Var
from .proofsys import Clause, KnowledgeBase

PRNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class PlantedInstance:
    n: int
    k: int
    r: int
    h_star: KDnf
    mu_target: float
    epsilon_star: float
    base_means: tuple[float, ...]
    c_base_rate: float
    proxies: tuple[tuple[int, Literal], ...]
    proxy_rate: float
    disjoint: bool = True
    seed: int | None = None

    @property
    def query_attr(self) -> int:
        return self.n

    @property
    def n_total(self) -> int:
        return self.n + 1

    @property
    def c(self) -> Formula:
        return Var(self.query_attr)

    @property
    def kb(self) -> KnowledgeBase:
        clauses = tuple(Clause.of([Literal(j, True), lit]) for j, lit in self.proxies)
        return KnowledgeBase(clauses, self.n_total)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return default_names(self.n_total)

    def manifest(self) -> dict:
        return {
            "generator": "planted k-DNF with noisy query column (synthetic construction)",
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "h_star": str(self.h_star),
            "query": str(self.c),
            "query_attr": self.query_attr + 1,
            "mu_target": self.mu_target,
            "epsilon_star": self.epsilon_star,
            "base_means": list(self.base_means),
            "c_base_rate": self.c_base_rate,
            "proxies": [[j + 1, str(lit)] for j, lit in self.proxies],
            "proxy_rate": self.proxy_rate,
            "disjoint": self.disjoint,
            "seed": self.seed,
            "prng": PRNG_NAME,
        }


def plant(
    n: int,
    k: int,
    r: int,
    mu_target: float,
    epsilon_star: float,
    seed: int,
    base_mean: float = 0.5,
    c_base_rate: float = 0.5,
    kb_links: bool = True,
    proxy_rate: float = 0.7,
    disjoint: bool = True,
) -> PlantedInstance:
    if k < 1 or r < 1:
        raise ValueError("need k >= 1 and r >= 1")
    if disjoint and r * k > n:
        raise ValueError(f"r*k = {r * k} disjoint literals do not fit in n = {n} attributes")
    if not disjoint and k > n:
        raise ValueError(f"k = {k} exceeds n = {n}")
    if not 0.0 < mu_target <= 1.0:
        raise ValueError(f"mu_target={mu_target} outside (0, 1]")
    if not 0.0 <= epsilon_star < 1.0:
        raise ValueError(f"epsilon_star={epsilon_star} outside [0, 1)")
    if not 0.0 < base_mean < 1.0:
        raise ValueError("base_mean must lie in (0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    if disjoint:
        attrs = rng.permutation(n)[: r * k].tolist()
        groups = [attrs[i * k : (i + 1) * k] for i in range(r)]
    else:
        groups = []
        while len(groups) < r:
            g = sorted(rng.choice(n, size=k, replace=False).tolist())
            if g not in groups:
                groups.append(g)
    terms = []
    for g in groups:
        signs = rng.random(k) < 0.5
        terms.append(Term.of(Literal(a, bool(s)) for a, s in zip(g, signs)))
    h_star = KDnf(tuple(terms), k)
    proxies: list[tuple[int, Literal]] = []
    if kb_links:
        planted_attrs = {lit.attr for t in terms for lit in t}
        free = [a for a in rng.permutation(n).tolist() if a not in planted_attrs]
        lits = [lit for t in terms for lit in t]
        for j, lit in zip(free, lits):
            proxies.append((j, lit))
    return PlantedInstance(
        n=n,
        k=k,
        r=r,
        h_star=h_star,
        mu_target=mu_target,
        epsilon_star=epsilon_star,
        base_means=(base_mean,) * n,
        c_base_rate=c_base_rate,
        proxies=tuple(proxies),
        proxy_rate=proxy_rate,
        disjoint=disjoint,
        seed=seed,
    )


def _term_truth(values: np.ndarray, t: Term) -> np.ndarray:
    ok = np.ones(values.shape[0], dtype=bool)
    for lit in t.literals:
        col = values[:, lit.attr].astype(bool)
        ok &= ~col if lit.negated else col
    return ok


@dataclass
class GroundSamples:
    """Total assignments (query column included) and their labels."""

    assignments: np.ndarray
    term_labels: np.ndarray
    c_labels: np.ndarray
    forced: np.ndarray = field(repr=False)

    @property
    def h_labels(self) -> np.ndarray:
        return self.term_labels.any(axis=1)


def sample_ground(instance: PlantedInstance, m: int, rng: np.random.Generator) -> GroundSamples:
    n, r = instance.n, instance.r
    means = np.asarray(instance.base_means)
    terms = instance.h_star.terms
    values = (rng.random((m, n)) < means).astype(np.int8)
    forced = rng.random(m) < instance.mu_target
    which = rng.integers(r, size=m)
    free_rows = ~forced
    # unforced rows: condition on no planted term holding
    if instance.disjoint:
        for t in terms:
            cols = [lit.attr for lit in t.literals]
            bad = free_rows & _term_truth(values, t)
            while bad.any():
                idx = np.flatnonzero(bad)
                values[np.ix_(idx, cols)] = (rng.random((idx.size, len(cols))) < means[cols]).astype(np.int8)
                bad = free_rows & _term_truth(values, t)
    else:
        cols = sorted({lit.attr for t in terms for lit in t.literals})
        for _ in range(10_000):
            bad = free_rows & np.any([_term_truth(values, t) for t in terms], axis=0)
            if not bad.any():
                break
            idx = np.flatnonzero(bad)
            values[np.ix_(idx, cols)] = (rng.random((idx.size, len(cols))) < means[cols]).astype(np.int8)
        else:
            raise RuntimeError("could not sample rows avoiding every planted term")
    for j, t in enumerate(terms):
        rows = np.flatnonzero(forced & (which == j))
        for lit in t.literals:
            values[rows, lit.attr] = 0 if lit.negated else 1
    for j, lit in instance.proxies:
        holds = values[:, lit.attr] == (0 if lit.negated else 1)
        values[:, j] = (holds & (rng.random(m) < instance.proxy_rate)).astype(np.int8)
    term_labels = np.stack([_term_truth(values, t) for t in terms], axis=1)
    h = term_labels.any(axis=1)
    noise = rng.random(m) < instance.epsilon_star
    coin = rng.random(m) < instance.c_base_rate
    c = np.where(h, ~noise, coin)
    full = np.concatenate([values, c[:, None].astype(np.int8)], axis=1)
    return GroundSamples(full, term_labels, c, forced)


@dataclass
class MaskedSample:
    dataset: Dataset
    truth: GroundSamples


def sample_masked(instance: PlantedInstance, m: int, mask_process: MaskProcess, seed: int) -> MaskedSample:
    """Draw ``m`` i.i.d. ground rows and mask them.  ``truth`` is for evaluation only."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    truth = sample_ground(instance, m, rng)
    masked = mask_array(truth.assignments, mask_process, rng)
    return MaskedSample(Dataset.from_array(masked, instance.attribute_names), truth)
