"""Tests for the packed coefficient ring."""

from fractions import Fraction

import pytest

from halo_slopes.modules.padic_arith import PadicElement, ValQ, cyclotomic_field, qp
from halo_slopes.modules.truncated_ring import TruncatedRing, ring_matrix_equal


class TestTruncatedRingArithmetic:
    """Test cases for ring operations."""

    def test_series_product_is_truncated(self):
        """Test (1 + 2X)(3 + X^2) modulo X^3."""
        ring = TruncatedRing(qp(3), 5, xprec=3)
        x = ring.pack([[1], [2]])
        y = ring.pack([[3], [0], [1]])
        assert ring.unpack(ring.mul(x, y)) == [[3], [6], [1]]

    def test_subtraction_and_negation(self):
        """Test that a - a vanishes and -a + a vanishes."""
        ring = TruncatedRing(cyclotomic_field(3, 1), 4, xprec=2)
        a = ring.pack([[5, 7], [1, 80]])
        assert ring.sub(a, a) == ring.zero
        assert ring.add(ring.neg(a), a) == ring.zero

    def test_eisenstein_reduction(self):
        """Test pi^2 = -3 - 3 pi in Q_3(zeta_3)."""
        ring = TruncatedRing(cyclotomic_field(3, 1), 4)
        pi = ring.pack([[0, 1]])
        assert ring.unpack(ring.mul(pi, pi)) == [[78, 78]]

    def test_scale_and_dot(self):
        """Test integer scaling and dot products."""
        ring = TruncatedRing(qp(5), 3, xprec=2)
        x = ring.pack([[2], [1]])
        assert ring.unpack(ring.scale(x, 3)) == [[6], [3]]
        assert ring.dot([x, ring.one], [ring.one, x]) == ring.scale(x, 2)

    def test_rejects_bad_precision(self):
        """Test that precisions must be positive."""
        with pytest.raises(ValueError):
            TruncatedRing(qp(3), 0)

    def test_sum_length_is_bounded(self):
        """Test that sums longer than the ring was sized for are refused."""
        ring = TruncatedRing(qp(3), 5, max_terms=2)
        ones = [ring.one] * 3
        assert ring.dot(ones[:2], ones[:2]) == ring.scalar(2)
        with pytest.raises(ValueError, match="overflows"):
            ring.dot(ones, ones)
        with pytest.raises(ValueError, match="overflows"):
            ring.sum(ones)
        with pytest.raises(ValueError):
            TruncatedRing(qp(3), 5, max_terms=0)

    def test_ring_matrix_equal(self):
        """Test matrix comparison."""
        assert ring_matrix_equal([[1, 2], [3, 4]], [[1, 2], [3, 4]])
        assert not ring_matrix_equal([[1, 2]], [[1, 2], [3, 4]])


class TestTruncatedRingValuations:
    """Test cases for valuations in the ring."""

    def test_normalized_valuation_exact(self):
        """Test min(v(b_m) + m) on 9 + 3X."""
        ring = TruncatedRing(qp(3), 5, xprec=3)
        assert ring.normalized_valuation(ring.pack([[9], [3]])) == ValQ(2)

    def test_normalized_valuation_bound(self):
        """Test that unknown higher coefficients make the value a lower bound."""
        ring = TruncatedRing(qp(3), 5, xprec=3)
        v = ring.normalized_valuation(ring.pack([[27]]))
        assert not v.exact
        assert v.value == 3

    def test_specialized_valuation(self):
        """Test v_p on the specialized ring."""
        ring = TruncatedRing(cyclotomic_field(3, 1), 4)
        assert ring.valuation(ring.pack([[0, 1]])) == ValQ(Fraction(1, 2))
        assert ring.valuation(ring.pack([[9, 0]])) == ValQ(2)
        assert ring.valuation(ring.zero) == ValQ.at_least(4)

    def test_valuation_needs_specialized_ring(self):
        """Test that v_p is refused on series."""
        ring = TruncatedRing(qp(3), 5, xprec=2)
        with pytest.raises(ValueError, match="specialized"):
            ring.valuation(ring.one)


class TestConversions:
    """Test cases for conversion to and from field elements."""

    def test_from_element(self):
        """Test loading a constant from a field element."""
        field = cyclotomic_field(3, 1)
        ring = TruncatedRing(field, 6, xprec=2)
        x = PadicElement.from_coeffs(field, [2, 5], 10)
        packed = ring.from_element(x)
        assert ring.coefficient(packed, 0).equals(x)
        assert ring.coefficient(packed, 1).is_zero()

    def test_from_element_embeds_subfield(self):
        """Test that Q_p elements land in the ring's field."""
        ring = TruncatedRing(cyclotomic_field(3, 1), 6)
        packed = ring.from_element(PadicElement.from_int(qp(3), 7, 10))
        assert ring.unpack(packed) == [[7, 0]]

    def test_specialize_element(self):
        """Test 1 + X at X = 3 with precision capped by Mx v(z)."""
        ring = TruncatedRing(qp(3), 6, xprec=4)
        z = PadicElement.from_int(qp(3), 3, 10)
        value = ring.specialize_element(ring.pack([[1], [1]]), z)
        assert value.equals(PadicElement.from_int_absolute(qp(3), 4, 4))
        assert value.precision == 4

    def test_specialize_at_zero(self):
        """Test that X = 0 keeps the constant term."""
        ring = TruncatedRing(qp(3), 6, xprec=4)
        z = PadicElement.zero(qp(3), 6)
        value = ring.specialize_element(ring.pack([[5], [1]]), z)
        assert value.equals(PadicElement.from_int_absolute(qp(3), 5, 6))

    def test_specialize_rejects_units(self):
        """Test that a unit z is refused."""
        ring = TruncatedRing(qp(3), 6, xprec=4)
        with pytest.raises(ValueError, match="positive valuation"):
            ring.specialize_element(ring.one, PadicElement.one(qp(3), 6))
