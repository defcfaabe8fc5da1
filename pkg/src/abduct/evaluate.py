"""Holdout estimates of plausibility and weak-entailment error."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .abduce import build_coverage
from .dataset import Dataset
from .formula import Formula, KDnf
from .proofsys import UNIT_PROPAGATION, KnowledgeBase, ProofEngine
from .sampling import AbductionParams, error_ceiling

SCHEMA = 1


def three_sigma_slack(denominator: int) -> float:
    """3 sqrt(1/4 / denominator): worst-case Bernoulli 3-sigma half-width."""
    if denominator <= 0:
        return math.inf
    return 3.0 * math.sqrt(0.25 / denominator)


@dataclass
class EvalReport:
    holdout_size: int
    provable_rows: int
    bad_rows: int
    plausibility_hat: float
    entailment_error_hat: float | None
    entailment_status: str
    term_bad_counts: list[int]
    term_provable_counts: list[int]
    plausibility_floor: float
    error_ceiling: float
    r_prime: int
    h: str = ""
    contradictions: int = 0
    disjoint_from_training: bool | None = None
    schema: int = SCHEMA

    @property
    def term_bad_rates(self) -> list[float]:
        if not self.holdout_size:
            return [0.0] * len(self.term_bad_counts)
        return [b / self.holdout_size for b in self.term_bad_counts]

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(self.error_ceiling):
            d["error_ceiling"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        if d.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')}")
        if d.get("error_ceiling") is None:
            d["error_ceiling"] = math.inf
        return cls(**d)


def evaluate(
    h: KDnf,
    kb: KnowledgeBase,
    c: Formula,
    holdout: Dataset,
    params: AbductionParams,
    engine: ProofEngine = UNIT_PROPAGATION,
    disjoint_from_training: bool | None = None,
) -> EvalReport:
    if kb.n != holdout.n:
        raise ValueError(f"knowledge base has {kb.n} attributes, holdout has {holdout.n}")
    terms = list(h.terms)
    matrix = build_coverage(terms, kb, c, holdout, engine)
    any_bits = 0
    for b in matrix.provable:
        any_bits |= b
    bad_bits = 0
    for b in matrix.bad:
        bad_bits |= b
    m = holdout.m
    provable_rows = any_bits.bit_count()
    bad_rows = bad_bits.bit_count()
    if provable_rows:
        error_hat, status = bad_rows / provable_rows, "Defined"
    else:
        error_hat, status = None, "Undefined"
    return EvalReport(
        holdout_size=m,
        provable_rows=provable_rows,
        bad_rows=bad_rows,
        plausibility_hat=provable_rows / m if m else 0.0,
        entailment_error_hat=error_hat,
        entailment_status=status,
        term_bad_counts=matrix.bad_counts,
        term_provable_counts=matrix.provable_counts,
        plausibility_floor=(1 - params.gamma) * params.mu,
        error_ceiling=error_ceiling(len(terms), params.gamma, params.epsilon),
        r_prime=len(terms),
        h=str(h),
        contradictions=matrix.contradictions,
        disjoint_from_training=disjoint_from_training,
    )


@dataclass
class CriterionCheck:
    name: str
    value: float | None
    bound: float
    slack: float
    margin: float | None
    passed: bool | None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("bound", "slack", "margin"):
            if d[key] is not None and not math.isfinite(d[key]):
                d[key] = None
        return d


@dataclass
class BoundComparison:
    plausibility: CriterionCheck
    entailment: CriterionCheck

    @property
    def passed(self) -> bool:
        return bool(self.plausibility.passed) and self.entailment.passed is not False

    def to_dict(self) -> dict:
        return {
            "plausibility": self.plausibility.to_dict(),
            "entailment": self.entailment.to_dict(),
            "passed": self.passed,
        }


def compare_bounds(report: EvalReport, params: AbductionParams, r_prime: int | None = None) -> BoundComparison:
    """Check the holdout estimates against (1-gamma) mu and r' (1+gamma) eps / (1-gamma).

    Each side gets a 3-sigma slack; boundaries are inclusive.  An undefined
    entailment estimate yields ``passed=None`` for that criterion.
    """
    r_prime = report.r_prime if r_prime is None else r_prime
    floor = (1 - params.gamma) * params.mu
    p_slack = three_sigma_slack(report.holdout_size)
    p_margin = report.plausibility_hat - floor
    plaus = CriterionCheck("plausibility", report.plausibility_hat, floor, p_slack, p_margin, report.plausibility_hat >= floor - p_slack)
    ceiling = error_ceiling(r_prime, params.gamma, params.epsilon)
    if report.entailment_error_hat is None:
        ent = CriterionCheck("entailment", None, ceiling, math.inf, None, None)
    else:
        e_slack = three_sigma_slack(report.provable_rows)
        e_margin = ceiling - report.entailment_error_hat
        ent = CriterionCheck("entailment", report.entailment_error_hat, ceiling, e_slack, e_margin, report.entailment_error_hat <= ceiling + e_slack)
    return BoundComparison(plaus, ent)
