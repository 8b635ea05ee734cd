"""Tests for classical spaces, slope multisets and duality checks."""

from fractions import Fraction

import pytest

from halo_slopes.modules.classical_space import (
    ClassicalSpace,
    SlopeMultiset,
    al_duality_check,
    classical_dimension,
    classical_hecke_matrix,
    compare_classicality,
    slope_multiset,
    slope_range_anomalies,
)
from halo_slopes.modules.coset_data import DatasetError, gen_synthetic
from halo_slopes.modules.distribution_module import hecke_matrix_overconv
from halo_slopes.modules.padic_arith import ValQ
from halo_slopes.modules.weight_space import FiniteCharacter, WeightError, make_locally_algebraic


class TestClassicalSpace:
    """Test cases for ClassicalSpace."""

    def test_dimension(self):
        """Test (k-1) p^(n-1) t."""
        assert classical_dimension(4, 2, 1, 3) == 9
        assert classical_dimension(2, 1, 5, 7) == 5
        with pytest.raises(WeightError):
            classical_dimension(1, 1, 1, 3)

    def test_space_from_dataset(self):
        """Test the data recorded for a level p^2 dataset."""
        space = ClassicalSpace(gen_synthetic(1, 3, t=3, level=2), 4, 0)
        assert space.t_base == 1
        assert space.dimension == 9
        assert space.to_dict()["level"] == 2

    def test_weight_mismatch(self):
        """Test that w must match the dataset."""
        with pytest.raises(WeightError, match="w=1"):
            ClassicalSpace(gen_synthetic(1, 3), 3, 1)

    def test_level_must_divide_rank(self):
        """Test that t' must be divisible by p^(n-1)."""
        with pytest.raises(DatasetError, match="not divisible"):
            ClassicalSpace(gen_synthetic(1, 3, level=2), 4, 0)

    def test_conductor_above_level(self):
        """Test that eps1/eps2 must be visible at the dataset level."""
        eps = (FiniteCharacter(3, 2, tame=1, wild=1), FiniteCharacter.trivial(3))
        with pytest.raises(DatasetError, match="conductor"):
            ClassicalSpace(gen_synthetic(1, 3), 4, 0, eps)


class TestSlopeMultiset:
    """Test cases for SlopeMultiset."""

    def test_sorted_and_totals(self):
        """Test sorting, totals and the below filter."""
        slopes = SlopeMultiset.of([2, Fraction(1, 2), 0])
        assert [s.value for s in slopes] == [0, Fraction(1, 2), 2]
        assert slopes.total() == Fraction(5, 2)
        assert slopes.below(2) == [ValQ(0), ValQ(Fraction(1, 2))]

    def test_inexact_slopes(self):
        """Test that a lower bound leaves the total unknown."""
        slopes = SlopeMultiset([ValQ(0), ValQ.at_least(3)])
        assert not slopes.exact
        assert slopes.total() is None
        assert slopes.below(3) == [ValQ(0)]
        assert slopes.to_dict()["count"] == 2

    def test_weight_two_slope(self):
        """Test that U_v acts by p on the trivial weight when t = 1."""
        matrix = classical_hecke_matrix(gen_synthetic(5, 3), 2, 0, prec=10)
        assert slope_multiset(matrix) == SlopeMultiset.of([1])

    def test_needs_specialized_matrix(self):
        """Test that slopes are refused over the weight ring."""
        component = make_locally_algebraic(2, 0, p=3).component
        matrix = hecke_matrix_overconv(gen_synthetic(5, 3), "Uv", component, moments=2, prec=8, xprec=2)
        with pytest.raises(ValueError, match="specialize"):
            slope_multiset(matrix)


class TestDuality:
    """Test cases for the Atkin-Lehner check."""

    def test_paired_slopes(self):
        """Test alpha_i + alpha_(N-1-i) = k - 1."""
        report = al_duality_check(SlopeMultiset.of([0, 1]), SlopeMultiset.of([0, 1]), 2)
        assert report.ok
        assert report.sum_ok
        assert report.first_violation is None

    def test_violation(self):
        """Test the reported positions of a failed pairing."""
        report = al_duality_check(SlopeMultiset.of([0, 1]), SlopeMultiset.of([1, 1]), 2)
        assert not report.ok
        assert report.violations == [1]
        assert report.first_violation == 0
        assert report.sum_ok is False

    def test_unresolved(self):
        """Test that lower bounds are neither pass nor fail."""
        report = al_duality_check(SlopeMultiset([ValQ(0), ValQ.at_least(1)]), SlopeMultiset.of([0, 1]), 2)
        assert report.violations == []
        assert report.unresolved == [1]
        assert report.sum_ok is None
        assert not report.ok

    def test_length_mismatch(self):
        """Test lists of different lengths."""
        with pytest.raises(ValueError, match="different lengths"):
            al_duality_check(SlopeMultiset.of([0]), SlopeMultiset.of([0, 1]), 2)
        with pytest.raises(ValueError, match="expected 3"):
            al_duality_check(SlopeMultiset.of([0]), SlopeMultiset.of([1]), 2, expected_count=3)

    def test_range_anomalies(self):
        """Test slopes outside [0, k-1]."""
        slopes = SlopeMultiset([ValQ(0), ValQ(4), ValQ.at_least(7)])
        assert slope_range_anomalies(slopes, 4) == [ValQ(4)]


class TestClassicality:
    """Test cases for the classical against overconvergent comparison."""

    @pytest.mark.slow
    def test_small_slopes_agree(self):
        """Test that slopes below k-1 agree at two truncations."""
        result = compare_classicality(gen_synthetic(5, 3), 4, 0, moments=6, prec=10)
        assert set(result.overconvergent) == {6, 10}
        assert all(result.matches.values())
        assert result.to_dict()["k"] == 4


@pytest.mark.slow
class TestClassicalitySweep:
    """Classicality and the shape of the duality report over seeded datasets."""

    @pytest.mark.parametrize("seed", range(20))
    @pytest.mark.parametrize("k, w", [(2, 0), (3, 1), (4, 0)])
    def test_small_slopes_are_classical(self, seed, k, w):
        """Test that slopes below k-1 agree with the classical ones at two truncations."""
        result = compare_classicality(gen_synthetic(seed, 3, w=w), k, w, moments=6, prec=20)
        assert result.resolved
        assert result.ok

    @pytest.mark.parametrize("seed", range(20))
    @pytest.mark.parametrize("k, w", [(2, 0), (3, 1), (4, 0)])
    def test_duality_report_counts(self, seed, k, w):
        """Test that the duality report covers the whole classical space."""
        matrix = classical_hecke_matrix(gen_synthetic(seed, 3, w=w), k, w, prec=20)
        slopes = slope_multiset(matrix)
        report = al_duality_check(slopes, slopes, k, expected_count=classical_dimension(k, 1, 1, 3))
        assert report.count == k - 1
        assert report.to_dict()["count"] == k - 1

    @pytest.mark.parametrize("seed", range(20))
    def test_duality_fails_at_weight_two(self, seed):
        """Test that the trivial-weight slope 1 has no dual partner on synthetic data."""
        slopes = slope_multiset(classical_hecke_matrix(gen_synthetic(seed, 3), 2, 0, prec=20))
        assert slopes == SlopeMultiset.of([1])
        report = al_duality_check(slopes, slopes, 2)
        assert report.violations == [0]
        assert report.first_violation == 0
        assert report.sum_ok is False
        assert not report.ok
