import math

import numpy as np
import pytest

from abduct.dataset import Independent
from abduct.formula import Witness, eval_total, witness_status
from abduct.proofsys import WITNESSED
from abduct.abduce import build_coverage
from abduct.synth import plant, sample_ground, sample_masked

STAR = 2


def within_3sigma(hat, p, n):
    return abs(hat - p) <= 3 * math.sqrt(max(p * (1 - p), 1e-12) / n)


def test_plant_shape():
    inst = plant(15, 2, 3, 0.8, 0.05, seed=1)
    assert len(inst.h_star.terms) == 3
    attrs = [lit.attr for t in inst.h_star.terms for lit in t]
    assert len(set(attrs)) == 6 and all(t.width == 2 for t in inst.h_star.terms)
    assert len(inst.kb) == 6
    assert inst.kb.n == 16 and inst.query_attr == 15


def test_plant_rejects_overfull():
    with pytest.raises(ValueError):
        plant(5, 2, 3, 0.5, 0.0, seed=1)


def test_zero_noise_never_witnesses_bad():
    inst = plant(10, 2, 3, 0.7, 0.0, seed=2)
    data = sample_masked(inst, 3000, Independent(0.0), seed=3).dataset
    m = build_coverage(list(inst.h_star.terms), inst.kb, inst.c, data)
    assert m.bad_counts == [0, 0, 0]


def test_mu_one_always_explained():
    inst = plant(10, 2, 3, 1.0, 0.1, seed=4)
    truth = sample_ground(inst, 2000, np.random.default_rng(5))
    assert truth.h_labels.all()


def test_single_literal_label_statistics():
    inst = plant(5, 1, 1, 0.4, 0.1, seed=6, kb_links=False)
    (lit,) = inst.h_star.terms[0].literals
    truth = sample_ground(inst, 10_000, np.random.default_rng(7))
    a = truth.assignments
    holds = a[:, lit.attr] == (0 if lit.negated else 1)
    c = a[:, inst.query_attr] == 1
    assert within_3sigma(holds.mean(), 0.4, len(a))
    assert within_3sigma(1 - c[holds].mean(), 0.1, holds.sum())
    assert within_3sigma(c[~holds].mean(), 0.5, (~holds).sum())


def test_masking_extremes():
    inst = plant(8, 2, 2, 0.5, 0.1, seed=8)
    assert not (sample_masked(inst, 200, Independent(0.0), seed=9).dataset.to_array() == STAR).any()
    assert (sample_masked(inst, 200, Independent(1.0), seed=9).dataset.to_array() == STAR).all()


def test_witnessed_rate_matches_analytic():
    n, k, r, mu, p, q = 12, 2, 3, 0.6, 0.3, 0.5
    inst = plant(n, k, r, mu, 0.05, seed=10, base_mean=q)
    sample = sample_masked(inst, 10_000, Independent(p), seed=11)
    h = inst.h_star.to_formula()
    hat = np.mean([witness_status(h, row) is Witness.TRUE for row in sample.dataset.rows])
    # forced term seen whole w.p. (1-p)^k; each other term true and seen w.p. (q(1-p))^k;
    # rows that are not forced satisfy no planted term at all
    miss_forced = 1 - (1 - p) ** k
    miss_other = 1 - (q * (1 - p)) ** k
    analytic = mu * (1 - miss_forced * miss_other ** (r - 1))
    assert within_3sigma(hat, analytic, 10_000)


def test_ground_truth_rates():
    inst = plant(15, 2, 3, 0.35, 0.07, seed=12)
    truth = sample_ground(inst, 100_000, np.random.default_rng(13))
    h = truth.h_labels
    assert within_3sigma(h.mean(), 0.35, h.size)
    assert within_3sigma(1 - truth.c_labels[h].mean(), 0.07, h.sum())


def test_labels_and_kb_consistent_with_truth():
    inst = plant(10, 2, 3, 0.5, 0.1, seed=14)
    truth = sample_ground(inst, 500, np.random.default_rng(15))
    h = inst.h_star.to_formula()
    for row, label, c in zip(truth.assignments.tolist(), truth.h_labels, truth.c_labels):
        assert eval_total(h, row) == bool(label)
        assert row[inst.query_attr] == int(c)
        for clause in inst.kb.clauses:
            assert any((row[l.attr] == 0) == l.negated for l in clause.literals)


def test_sidecar_consistency():
    inst = plant(10, 2, 3, 0.5, 0.1, seed=16)
    s = sample_masked(inst, 1000, Independent(0.4), seed=17)
    masked = s.dataset.to_array()
    seen = masked != STAR
    assert (masked[seen] == s.truth.assignments[seen]).all()


def test_reproducible():
    inst = plant(10, 2, 3, 0.5, 0.1, seed=18)
    assert plant(10, 2, 3, 0.5, 0.1, seed=18) == inst
    a = sample_masked(inst, 100, Independent(0.2), seed=19).dataset
    b = sample_masked(inst, 100, Independent(0.2), seed=19).dataset
    assert a == b


def test_overlapping_terms_flag():
    inst = plant(4, 2, 3, 0.5, 0.1, seed=20, disjoint=False, kb_links=False)
    truth = sample_ground(inst, 5000, np.random.default_rng(21))
    assert within_3sigma(truth.h_labels.mean(), 0.5, 5000)


def test_witnessed_engine_matches_truth_on_kb_free_columns():
    inst = plant(10, 2, 2, 0.6, 0.0, seed=22)
    s = sample_masked(inst, 500, Independent(0.3), seed=23)
    m = build_coverage(list(inst.h_star.terms), inst.kb, inst.c, s.dataset, WITNESSED)
    for j in range(2):
        for i in range(500):
            if (m.provable[j] >> i) & 1:
                assert s.truth.term_labels[i, j]
