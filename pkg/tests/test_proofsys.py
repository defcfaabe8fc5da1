import random

import pytest

from abduct.formula import Literal, Term, parse_formula
from abduct.oracle import semantic_provability
from abduct.proofsys import (
    CONTRADICTION,
    UNIT_PROPAGATION,
    WITNESSED,
    Clause,
    KnowledgeBase,
    ProofEngine,
    bounded_resolution,
    derive_literals,
    neg_query_provable,
    parse_kb,
    propagation_rounds,
    term_provable,
)

STAR = 2
X1, NX1, X2, NX2 = Literal(0), Literal(0, True), Literal(1), Literal(1, True)
T = Term.of([X1, NX2])  # x1 & ~x2
ENGINES = [WITNESSED, UNIT_PROPAGATION, bounded_resolution(1), bounded_resolution(2), bounded_resolution(3)]


def kb(clauses, n):
    return KnowledgeBase.from_lists(clauses, n)


class TestDerive:
    def test_implication_derives_negation(self):
        assert derive_literals(kb([[NX1, NX2]], 2), (1, STAR)) == (1, 0)

    def test_nothing_known(self):
        assert derive_literals(kb([], 2), (STAR, STAR)) == (STAR, STAR)

    def test_unit_clash(self):
        assert derive_literals(kb([[X1], [NX1]], 1), (STAR,)) is CONTRADICTION

    def test_witnessed_ignores_kb(self):
        assert derive_literals(kb([[X1]], 1), (STAR,), WITNESSED) == (STAR,)

    def test_resolution_finds_what_unitprop_misses(self):
        # (x1 | x2), (x1 | ~x2) gives x1 only by resolving two binary clauses
        base = kb([[X1, X2], [X1, NX2]], 2)
        assert derive_literals(base, (STAR, STAR), UNIT_PROPAGATION) == (STAR, STAR)
        assert derive_literals(base, (STAR, STAR), bounded_resolution(1)) == (1, STAR)

    def test_width_bound_blocks_wide_resolvents(self):
        x3, nx3 = Literal(2), Literal(2, True)
        base = kb([[X1, X2, x3], [X1, X2, nx3], [X1, NX2]], 3)
        # x1|x2 (width 2) is needed before x1 appears
        assert derive_literals(base, (STAR,) * 3, bounded_resolution(1))[0] == STAR
        assert derive_literals(base, (STAR,) * 3, bounded_resolution(2))[0] == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            derive_literals(kb([], 2), (1,))


class TestTermProvable:
    def test_observed(self):
        assert term_provable(kb([], 2), T, (1, 0))

    def test_provable_through_kb(self):
        assert term_provable(kb([[NX1, NX2]], 2), T, (1, STAR))

    def test_true_but_unprovable(self):
        assert not term_provable(kb([], 2), T, (STAR, STAR))

    def test_ex_falso(self):
        assert term_provable(kb([[X1], [NX1]], 2), Term.of([X2]), (STAR, STAR))


class TestNegQuery:
    c = parse_formula("x1 | x2")

    def test_both_false(self):
        assert neg_query_provable(kb([], 2), self.c, (0, 0))

    def test_derived(self):
        # hand propagation: ~x2 is a unit clause, so x2 = 0; with x1 = 0 the query folds to 0
        assert derive_literals(kb([[NX2]], 2), (0, STAR)) == (0, 0)
        assert neg_query_provable(kb([[NX2]], 2), self.c, (0, STAR))

    def test_nothing_known(self):
        assert not neg_query_provable(kb([], 1), parse_formula("x1"), (STAR,))


class TestKbText:
    def test_parse(self):
        base = parse_kb("# comment\n~x1 | x2\n\nx3  # trailing\n", 3)
        assert base.clauses == (Clause.of([NX1, X2]), Clause.of([Literal(2)]))
        assert parse_kb(base.to_text(), 3) == base

    def test_duplicates_removed(self):
        assert len(parse_kb("x1 | x2\nx2 | x1\n", 2)) == 1

    @pytest.mark.parametrize("text,msg", [("x4\n", "line 1"), ("x1 | y\n", "bad literal"), ("x1\nx1 | ~x1\n", "line 2")])
    def test_errors(self, text, msg):
        with pytest.raises(ValueError, match=msg):
            parse_kb(text, 3)

    def test_engine_parse(self):
        assert ProofEngine.parse("resolution:3") == bounded_resolution(3)
        assert ProofEngine.parse("resolution", default_width=4).width == 4
        assert ProofEngine.parse("unitprop") == UNIT_PROPAGATION
        with pytest.raises(ValueError):
            ProofEngine.parse("resolution:0")
        with pytest.raises(ValueError):
            ProofEngine.parse("magic")


# ---------------------------------------------------------------------------
# randomized properties (small n, fixed seeds)
# ---------------------------------------------------------------------------


def random_kb(r, n, max_clauses=6, max_width=3):
    clauses = []
    for _ in range(r.randint(0, max_clauses)):
        attrs = r.sample(range(n), r.randint(1, min(max_width, n)))
        clauses.append([Literal(a, r.random() < 0.5) for a in attrs])
    return kb(clauses, n)


def random_row(r, n, p_hide=0.5):
    return tuple(STAR if r.random() < p_hide else r.randint(0, 1) for _ in range(n))


def random_term(r, n, k=3):
    attrs = r.sample(range(n), r.randint(1, min(k, n)))
    return Term.of(Literal(a, r.random() < 0.5) for a in attrs)


def test_engine_monotone():
    r = random.Random(11)
    for _ in range(400):
        n = r.randint(1, 7)
        base, t, rho = random_kb(r, n), random_term(r, n), random_row(r, n)
        verdicts = [term_provable(base, t, rho, e) for e in ENGINES]
        assert verdicts == sorted(verdicts), verdicts


def test_unit_propagation_rounds_bounded():
    r = random.Random(12)
    for _ in range(300):
        n = r.randint(1, 8)
        base, rho = random_kb(r, n, max_clauses=10), random_row(r, n, 0.8)
        assert propagation_rounds(base, rho) <= n


def test_soundness_small():
    r = random.Random(13)
    for _ in range(300):
        n = r.randint(1, 6)
        base, t, rho = random_kb(r, n), random_term(r, n), random_row(r, n)
        for e in ENGINES:
            if term_provable(base, t, rho, e):
                assert semantic_provability(base, t, rho)


def test_refinement_keeps_provability_small():
    r = random.Random(14)
    for _ in range(300):
        n = r.randint(1, 6)
        base, t, rho = random_kb(r, n), random_term(r, n), random_row(r, n)
        finer = tuple(r.randint(0, 1) if v == STAR and r.random() < 0.5 else v for v in rho)
        for e in ENGINES:
            if term_provable(base, t, rho, e):
                assert term_provable(base, t, finer, e)
