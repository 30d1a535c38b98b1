import itertools
from fractions import Fraction

import pytest

from virasoro_engine.correlators import (
    PAPER_PRINTED,
    CorrelatorSum,
    all_permutations,
    corr_equal,
    evaluate,
    generating_transpositions,
    is_zero,
    npoint,
    symmetry_defect,
    three_point_closed_form,
    two_point_closed_form,
    ward_defects,
)
from virasoro_engine.exact_arith import CPoly

C = CPoly.c()


def pair(n, i, j, k, coeff=1):
    """(x_i - x_j)^k with 1-based labels, either orientation."""
    return CorrelatorSum.pair_power(n, i - 1, j - 1, k, coeff)


class TestRecursion:
    def test_base_cases(self):
        assert corr_equal(npoint(0), CorrelatorSum.constant(0, 1))
        assert npoint(1).is_structurally_zero()

    def test_two_point(self):
        assert corr_equal(npoint(2), pair(2, 1, 2, -4, C * Fraction(1, 2)))

    def test_two_point_orientation(self):
        assert corr_equal(npoint(2), pair(2, 2, 1, -4, C * Fraction(1, 2)))

    def test_three_point(self):
        closed = CorrelatorSum.constant(3, C).times_pair(0, 1, -2).times_pair(0, 2, -2).times_pair(1, 2, -2)
        assert corr_equal(npoint(3), closed)
        assert corr_equal(npoint(3), three_point_closed_form())

    def test_printed_recursion_differs(self):
        assert not corr_equal(npoint(3, PAPER_PRINTED), three_point_closed_form())
        pts = (0, 1, 2)
        assert evaluate(npoint(3), pts, 1) == Fraction(1, 4)
        assert evaluate(npoint(3, PAPER_PRINTED), pts, 1) == Fraction(13, 8)

    def test_printed_two_point_agrees(self):
        # the discrepancy only appears from three points on
        assert corr_equal(npoint(2, PAPER_PRINTED), two_point_closed_form())

    def test_cap(self):
        with pytest.raises(ValueError):
            npoint(7)
        with pytest.raises(ValueError):
            npoint(3, max_points=2)
        with pytest.raises(ValueError):
            npoint(-1)

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            npoint(2, form="bogus")


class TestEquality:
    def test_partial_fractions(self):
        n = 3
        s = (
            pair(n, 1, 2, -1).times_pair(1, 2, -1)
            + pair(n, 2, 3, -1).times_pair(2, 0, -1)
            + pair(n, 3, 1, -1).times_pair(0, 1, -1)
        )
        assert not s.is_structurally_zero()
        assert is_zero(s)

    def test_reflexive(self):
        F = npoint(4)
        assert corr_equal(F, F)

    def test_detects_difference(self):
        assert not corr_equal(npoint(2), pair(2, 1, 2, -4, C))

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            corr_equal(npoint(2), npoint(3))


class TestWard:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_annihilated(self, n):
        assert all(is_zero(d) for d in ward_defects(npoint(n)))

    def test_wrong_weight(self):
        F = pair(2, 1, 2, -3)
        d1, d2, _ = ward_defects(F)
        assert is_zero(d1)
        assert not is_zero(d2)

    def test_special_conformal_frame(self):
        # for a translation-invariant F the x_1 = 0 frame value plus 2 x_1 D2 is the
        # full operator; check against direct differentiation at rational points
        F = pair(2, 1, 2, -3)
        _, D2, K = ward_defects(F)
        for pts in [(Fraction(1, 3), 2), (-1, Fraction(5, 2))]:
            x1, x2 = (Fraction(p) for p in pts)
            # direct: sum_i (x_i^2 d_i + 4 x_i) F with F = (x1 - x2)^-3
            d = x1 - x2
            direct = x1**2 * (-3) * d**-4 + x2**2 * 3 * d**-4 + 4 * (x1 + x2) * d**-3
            assert evaluate(K, pts, 0) + 2 * x1 * evaluate(D2, pts, 0) == direct

    def test_printed_recursion_breaks_ward(self):
        assert not all(is_zero(d) for d in ward_defects(npoint(3, PAPER_PRINTED)))


class TestSymmetry:
    def test_two_point_swap(self):
        assert is_zero(symmetry_defect(npoint(2), (1, 0)))

    def test_three_point_transpositions(self):
        for p in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            assert is_zero(symmetry_defect(npoint(3), p))

    def test_four_point_all_permutations(self):
        F = npoint(4)
        perms = list(all_permutations(4))
        assert len(perms) == 24
        for p in perms:
            assert is_zero(symmetry_defect(F, p))

    def test_generators(self):
        assert generating_transpositions(3) == [(1, 0, 2), (0, 2, 1)]


def independent_pairing_sum(n: int) -> CorrelatorSum:
    """Sum over perfect matchings, enumerated by brute force over permutations."""
    seen = set()
    total = CorrelatorSum(n)
    for perm in itertools.permutations(range(n)):
        pairs = frozenset(frozenset(perm[i : i + 2]) for i in range(0, n, 2))
        if pairs in seen:
            continue
        seen.add(pairs)
        term = CorrelatorSum.constant(n, (C * Fraction(1, 2)) ** (n // 2))
        for pr in pairs:
            a, b = sorted(pr)
            term = term.times_pair(a, b, -4)
        total = total + term
    return total


class TestWickStructure:
    def test_four_point_central_part(self):
        F = npoint(4)
        assert corr_equal(F.c_part(2), independent_pairing_sum(4).c_part(2))
        assert len({frozenset(m) for m in independent_pairing_sum(4).terms}) == 3


class TestEvaluate:
    def test_three_point(self):
        assert evaluate(npoint(3), [0, 1, 2], 1) == Fraction(1, 4)

    def test_two_point(self):
        assert evaluate(npoint(2), [0, 1], 2) == 1

    def test_one_point(self):
        assert evaluate(npoint(1), [Fraction(7, 3)], 5) == 0

    def test_coincident(self):
        with pytest.raises(ZeroDivisionError):
            evaluate(npoint(2), [1, 1], 1)

    def test_four_point_symmetric_values(self):
        F = npoint(4)
        pts = [0, 1, 3, Fraction(-1, 2)]
        base = evaluate(F, pts, Fraction(7, 2))
        for p in all_permutations(4):
            assert evaluate(F, [pts[i] for i in p], Fraction(7, 2)) == base


class TestSerialization:
    def test_json_one_based(self):
        doc = npoint(2).to_json()
        assert doc == [{"coefficient": "1/2*c", "factors": [{"i": 1, "j": 2, "power": -4}]}]
