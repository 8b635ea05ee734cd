"""Tests for p-adic arithmetic."""

from fractions import Fraction

import numpy as np
import pytest

from halo_slopes.modules.padic_arith import (
    PadicElement,
    PrecisionError,
    ValQ,
    binom_coeffs,
    cyclotomic_field,
    embed,
    exp_p,
    exp_p_int,
    ext_arith,
    is_prime,
    log_coordinate,
    log_floor,
    padic_val,
    phi_prime_power,
    plog,
    plog_int,
    qp,
    radical_field,
    root_of_unity_power,
    teichmuller,
    v_p_factorial,
    v_p_int,
)


class TestIntegerHelpers:
    """Test cases for the integer kernels."""

    def test_valuations(self):
        """Test v_p of integers and factorials."""
        assert v_p_int(54, 3) == 3
        assert v_p_int(-7, 7) == 1
        assert v_p_factorial(10, 3) == 4
        assert v_p_factorial(0, 5) == 0

    def test_is_prime(self):
        """Test primality on small numbers."""
        assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]

    def test_phi_prime_power(self):
        """Test Euler phi of prime powers."""
        assert phi_prime_power(3, 0) == 1
        assert phi_prime_power(3, 1) == 2
        assert phi_prime_power(3, 2) == 6
        assert phi_prime_power(5, 2) == 20

    def test_teichmuller(self):
        """Test that Teichmuller lifts are (p-1)-th roots of unity congruent to a."""
        p, prec = 5, 10
        modulus = p**prec
        for a in range(1, p):
            w = teichmuller(a, p, prec)
            assert w % p == a
            assert pow(w, p - 1, modulus) == 1

    def test_teichmuller_rejects_non_units(self):
        """Test that multiples of p have no Teichmuller lift."""
        with pytest.raises(ValueError, match="not a unit"):
            teichmuller(6, 3, 5)

    def test_log_is_additive(self):
        """Test log(uv) = log(u) + log(v) on 1-units."""
        p, prec = 3, 12
        modulus = p**prec
        u, v = 4, 7
        assert plog_int(u * v, p, prec) == (plog_int(u, p, prec) + plog_int(v, p, prec)) % modulus

    def test_log_coordinate_of_exp_p(self):
        """Test that exp(p) has coordinate 1."""
        p = 3
        assert log_coordinate(exp_p_int(p, 12), p, 8) == 1

    def test_log_of_exp_p(self):
        """Test log(exp(p)) = p on elements."""
        value = plog(exp_p(3, 8))
        assert value.equals(PadicElement.from_int_absolute(qp(3), 3, 8))
        with pytest.raises(ValueError, match="not a 1-unit"):
            plog(PadicElement.from_int(qp(3), 2, 8))


class TestValQ:
    """Test cases for ValQ."""

    def test_ordering(self):
        """Test ordering of exact values, lower bounds and infinity."""
        values = [ValQ.infinity(), ValQ.at_least(2), ValQ(2), ValQ(Fraction(1, 2))]
        assert sorted(values) == [ValQ(Fraction(1, 2)), ValQ(2), ValQ.at_least(2), ValQ.infinity()]

    def test_addition(self):
        """Test that inexactness propagates through sums."""
        total = ValQ(1) + ValQ.at_least(Fraction(1, 3))
        assert not total.exact
        assert total.value == Fraction(4, 3)
        assert (ValQ(1) + ValQ.infinity()).is_infinite

    def test_str(self):
        """Test text forms."""
        assert str(ValQ(Fraction(3, 2))) == "3/2"
        assert str(ValQ.at_least(4)) == ">=4"
        assert str(ValQ.infinity()) == "inf"


class TestFields:
    """Test cases for the ramified extensions."""

    def test_cyclotomic_degree(self):
        """Test ramification indices of cyclotomic fields."""
        assert cyclotomic_field(3, 0) == qp(3)
        assert cyclotomic_field(3, 1).e == 2
        assert cyclotomic_field(3, 2).e == 6
        assert cyclotomic_field(5, 1).e == 4

    def test_radical_field(self):
        """Test Q_p(p^(1/e))."""
        field = radical_field(3, 4)
        assert field.e == 4
        assert field.poly == (-3, 0, 0, 0, 1)

    def test_non_eisenstein_rejected(self):
        """Test that a non-Eisenstein polynomial is refused."""
        from halo_slopes.modules.padic_arith import RamifiedExtension

        with pytest.raises(ValueError, match="not Eisenstein"):
            RamifiedExtension(3, (9, 0, 1))


class TestPadicElement:
    """Test cases for PadicElement arithmetic."""

    def test_uniformizer_valuation(self):
        """Test v_p of the uniformizer in several fields."""
        assert padic_val(PadicElement.uniformizer(qp(3))) == ValQ(1)
        assert padic_val(PadicElement.uniformizer(cyclotomic_field(3, 1))) == ValQ(Fraction(1, 2))
        assert padic_val(PadicElement.uniformizer(cyclotomic_field(3, 2))) == ValQ(Fraction(1, 6))
        assert padic_val(PadicElement.uniformizer(radical_field(3, 4))) == ValQ(Fraction(1, 4))

    def test_uniformizer_power_is_p(self):
        """Test pi^e = p up to a unit."""
        field = radical_field(5, 3)
        pi = PadicElement.uniformizer(field, 10)
        assert (pi**3).equals(PadicElement.from_int(field, 5, 8))

    def test_field_operations(self):
        """Test that (a*b)/b == a and (a+b)-b == a."""
        field = cyclotomic_field(3, 1)
        a = PadicElement.from_coeffs(field, [2, 5], 10)
        b = PadicElement.from_coeffs(field, [1, 1], 10)
        assert ext_arith(ext_arith(a, b, "mul"), b, "div").equals(a)
        assert ext_arith(ext_arith(a, b, "add"), b, "sub").equals(a)

    def test_inverse_of_non_unit(self):
        """Test inversion of an element of positive valuation."""
        field = cyclotomic_field(3, 1)
        pi = PadicElement.uniformizer(field, 10)
        inv = pi.inverse()
        assert padic_val(inv) == ValQ(Fraction(-1, 2))
        assert (inv * pi).equals(PadicElement.one(field, 8))

    def test_division_by_zero(self):
        """Test that dividing by zero at tracked precision is a precision error."""
        field = qp(3)
        with pytest.raises(PrecisionError):
            PadicElement.zero(field, 5).inverse()

    def test_valuation_lower_bound(self):
        """Test that an element indistinguishable from zero reports a lower bound."""
        x = PadicElement.from_int_absolute(qp(3), 81, 3)
        v = padic_val(x)
        assert not v.exact
        assert v.value == 3

    def test_residue_coeffs_needs_precision(self):
        """Test the refusal to produce more digits than known."""
        x = PadicElement.from_int_absolute(qp(3), 5, 4)
        assert x.residue_coeffs(4) == [5]
        with pytest.raises(PrecisionError):
            x.residue_coeffs(6)

    def test_fraction_coercion(self):
        """Test arithmetic with rational scalars."""
        field = qp(5)
        x = PadicElement.from_int(field, 2, 10)
        assert (x * Fraction(1, 2)).equals(PadicElement.one(field, 10))


class TestEmbeddingAndRoots:
    """Test cases for embeddings and roots of unity."""

    def test_embed_preserves_valuation(self):
        """Test that embedding keeps v_p."""
        x = PadicElement.from_int(qp(3), 18, 10)
        y = embed(x, cyclotomic_field(3, 2))
        assert padic_val(y) == ValQ(2)

    def test_cyclotomic_embedding_of_zeta(self):
        """Test that zeta_3 maps to zeta_9^3."""
        low = root_of_unity_power(3, 1, 1, 10)
        high = root_of_unity_power(3, 2, 3, 10)
        assert embed(low, cyclotomic_field(3, 2)).equals(high)

    def test_root_of_unity_order(self):
        """Test zeta_{p^j}^(p^j) = 1."""
        zeta = root_of_unity_power(3, 2, 1, 10)
        assert (zeta**9).equals(PadicElement.one(cyclotomic_field(3, 2), 10))
        assert not (zeta**3).equals(PadicElement.one(cyclotomic_field(3, 2), 10))

    def test_binomial_coefficients(self):
        """Test C(a, j) for an integer a."""
        a = PadicElement.from_int_absolute(qp(3), 5, 10)
        values = [c.lift() for c in binom_coeffs(a, 4)]
        assert values == [1, 5, 10, 10]


FIELDS = [qp(3), cyclotomic_field(3, 1), cyclotomic_field(3, 2), radical_field(5, 3)]


def _random_element(rng, field, prec=12, bound=4):
    """A nonzero element with pi-basis coefficients below p^bound."""
    while True:
        coeffs = [int(c) for c in rng.integers(0, field.p**bound, size=field.e)]
        if any(coeffs):
            return PadicElement.from_coeffs(field, coeffs, prec)


def _valuation_by_division(x):
    """Count divisions by pi until the constant coefficient is a unit."""
    field = x.field
    pi_inv = PadicElement.uniformizer(field, 12).inverse()
    steps = 0
    while x.coeffs[0] % field.p == 0:
        x = x * pi_inv
        steps += 1
    return Fraction(steps, field.e)


class TestLiteralExamples:
    """Test cases with values worked out by hand."""

    def test_log_of_four(self):
        """Test log(4) = 3 - 9/2 + 9 = 21 mod 27 at p = 3."""
        assert plog_int(4, 3, 3) == 21
        value = plog(PadicElement.from_int_absolute(qp(3), 4, 3))
        assert value.equals(PadicElement.from_int_absolute(qp(3), 21, 3))

    def test_one_over_three(self):
        """Test that 1/3 from five digits has valuation -1 and precision 4."""
        field = qp(3)
        quotient = ext_arith(PadicElement.from_int(field, 1, 5), PadicElement.from_int(field, 3, 5), "div")
        assert padic_val(quotient) == ValQ(-1)
        assert quotient.precision == 4

    def test_log_floor(self):
        """Test the integer logarithm."""
        assert [log_floor(n, 3) for n in (1, 2, 3, 8, 9, 26, 27)] == [0, 0, 1, 1, 2, 2, 3]
        assert log_floor(125, 5) == 3
        with pytest.raises(ValueError):
            log_floor(0, 3)


class TestRandomProperties:
    """Seeded property tests over several extensions."""

    @pytest.mark.parametrize("field", FIELDS, ids=repr)
    def test_valuation_is_multiplicative(self, field):
        """Test v(ab) = v(a) + v(b) on random pairs."""
        rng = np.random.default_rng(20)
        for _ in range(250):
            a = _random_element(rng, field)
            b = _random_element(rng, field)
            va, vb = padic_val(a), padic_val(b)
            assert va.exact and vb.exact
            assert padic_val(ext_arith(a, b, "mul")) == va + vb

    @pytest.mark.parametrize("field", FIELDS, ids=repr)
    def test_valuation_matches_division_by_uniformizer(self, field):
        """Test min_i(v_p(a_i) + i/e) against repeated division by pi."""
        rng = np.random.default_rng(21)
        for _ in range(40):
            x = _random_element(rng, field)
            assert padic_val(x) == ValQ(_valuation_by_division(x))

    @pytest.mark.parametrize("field", [cyclotomic_field(3, 1), radical_field(3, 4)], ids=repr)
    def test_log_is_a_homomorphism(self, field):
        """Test log(uv) = log(u) + log(v) on 1-units of a ramified field."""
        rng = np.random.default_rng(22)
        for _ in range(10):
            a = _random_element(rng, field, prec=10, bound=8)
            b = _random_element(rng, field, prec=10, bound=8)
            u = 1 + 3 * a
            v = 1 + 3 * b
            assert plog(u * v).equals(plog(u) + plog(v))
