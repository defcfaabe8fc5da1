"""Learning k-DNF explanations from partially observed examples."""

__version__ = "0.1.0"

from .abduce import (
    AbductionResult,
    CoverageMatrix,
    Status,
    abduce,
    build_coverage,
    enumerate_terms,
    estimate_mu,
    filter_terms,
    greedy_partial_cover,
)
from .dataset import Dataset, FixedSubset, Independent, ValueDependent, load_dataset, mask, save_dataset
from .evaluate import EvalReport, compare_bounds, evaluate
from .formula import KDnf, Literal, Term, TriValue, Witness, eval_total, parse_formula, restrict, witness_status
from .proofsys import (
    CONTRADICTION,
    Clause,
    KnowledgeBase,
    ProofEngine,
    derive_literals,
    neg_query_provable,
    parse_kb,
    term_provable,
)
from .sampling import AbductionParams, DerivedParams, required_samples
