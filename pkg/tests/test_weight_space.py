"""Tests for weight space."""

from fractions import Fraction

import numpy as np
import pytest

from halo_slopes.modules.padic_arith import (
    PadicElement,
    ValQ,
    cyclotomic_field,
    embed,
    exp_p_int,
    qp,
    radical_field,
)
from halo_slopes.modules.weight_space import (
    AnnulusError,
    AsSeries,
    FiniteCharacter,
    WeightComponent,
    WeightError,
    WeightPoint,
    eval_weight_char,
    in_boundary_annulus,
    ladder_weight,
    make_locally_algebraic,
    z_coordinate,
)


@pytest.fixture
def trivial_component():
    """The component of the trivial weight (2, 0) at p = 3."""
    return make_locally_algebraic(2, 0, p=3).component


class TestFiniteCharacter:
    """Test cases for FiniteCharacter."""

    def test_conductor_constraints(self):
        """Test the shape conditions on exponents."""
        with pytest.raises(WeightError):
            FiniteCharacter(3, 0, tame=1)
        with pytest.raises(WeightError):
            FiniteCharacter(3, 1, tame=0)
        with pytest.raises(WeightError):
            FiniteCharacter(3, 2, tame=0, wild=3)

    def test_parse(self):
        """Test the "m:tame:wild" form."""
        chi = FiniteCharacter.parse(3, "3:1:2")
        assert (chi.conductor, chi.tame, chi.wild) == (3, 1, 2)
        assert FiniteCharacter.parse(3, "0").is_trivial()
        with pytest.raises(WeightError, match="cannot read"):
            FiniteCharacter.parse(3, "a:b")

    def test_inverse(self):
        """Test chi * chi^-1 = 1."""
        chi = FiniteCharacter(3, 2, tame=1, wild=1)
        assert (chi * chi.inverse()).is_trivial()
        assert chi.inverse() == FiniteCharacter(3, 2, tame=1, wild=2)

    def test_product_drops_conductor(self):
        """Test that wild parts cancelling lowers the conductor."""
        chi = FiniteCharacter(5, 3, tame=0, wild=1)
        psi = FiniteCharacter(5, 3, tame=2, wild=24)
        assert chi * psi == FiniteCharacter(5, 1, tame=2)

    def test_evaluate_is_multiplicative(self):
        """Test chi(t1 t2) = chi(t1) chi(t2)."""
        chi = FiniteCharacter(3, 3, tame=1, wild=1)
        prec = 8
        for t1, t2 in [(2, 5), (4, 7), (10, 11)]:
            product = chi.evaluate(t1, prec) * chi.evaluate(t2, prec)
            assert chi.evaluate(t1 * t2, prec).equals(product)

    def test_evaluate_rejects_non_units(self):
        """Test that multiples of p are refused."""
        with pytest.raises(WeightError, match="not a unit"):
            FiniteCharacter(3, 2, tame=0, wild=1).evaluate(6)


class TestLocallyAlgebraicWeights:
    """Test cases for locally algebraic weights."""

    def test_parity(self):
        """Test that k and w must agree mod 2."""
        with pytest.raises(WeightError, match="parity"):
            make_locally_algebraic(3, 0, p=3)

    def test_small_k(self):
        """Test that k < 2 is refused."""
        with pytest.raises(WeightError):
            make_locally_algebraic(0, 0, p=3)

    def test_exponents(self):
        """Test (A, B) = ((w+k-2)/2, (w-k+2)/2)."""
        assert make_locally_algebraic(4, 0, p=3).exponents == (1, -1)
        assert make_locally_algebraic(3, 5, p=5).exponents == (3, 2)

    def test_component_consistency(self):
        """Test that omega restricts to eta on the diagonal."""
        with pytest.raises(WeightError, match="diagonal"):
            WeightComponent(3, 0, FiniteCharacter.trivial(3), (1, 0))

    def test_evaluate(self):
        """Test kappa(t1, t2) = t1^A t2^B for trivial characters."""
        wp = make_locally_algebraic(4, 2, p=5)
        value = wp.evaluate(2, 3, 6)
        # A = 2, B = 0
        assert value.equals(PadicElement.from_int_absolute(qp(5), 4, 6))


class TestZCoordinate:
    """Test cases for the z-coordinate and ladder weights."""

    def test_trivial_weight_is_zero(self):
        """Test z = 0 at k = 2 with trivial characters."""
        z, v = z_coordinate(make_locally_algebraic(2, 0, p=3), 10)
        assert z.is_zero()
        assert v.is_infinite

    def test_weight_four(self):
        """Test v(z) = 1 for exp(p)^2 - 1."""
        _, v = z_coordinate(make_locally_algebraic(4, 0, p=3), 10)
        assert v == ValQ(1)

    def test_ladder_valuations(self, trivial_component):
        """Test v(z) = 1/phi(p^(L+1)) along the ladder."""
        expected = {0: Fraction(1, 2), 1: Fraction(1, 6), 2: Fraction(1, 18)}
        for level, value in expected.items():
            wp = ladder_weight(trivial_component, 2, level)
            assert wp.component == trivial_component
            z, v = z_coordinate(wp, 10)
            assert v == ValQ(value)
            assert in_boundary_annulus(z, trivial_component)

    def test_ladder_parity(self, trivial_component):
        """Test that the ladder respects the parity of w."""
        with pytest.raises(WeightError):
            ladder_weight(trivial_component, 3, 0)

    def test_annulus(self, trivial_component):
        """Test the boundary annulus 0 < v(z) < 1 when c = 0."""
        assert not in_boundary_annulus(PadicElement.from_int(qp(3), 3, 10), trivial_component)
        assert not in_boundary_annulus(PadicElement.zero(qp(3), 10), trivial_component)

    def test_universal_character_matches_ladder_weight(self, trivial_component):
        """Test that the universal character at z_kappa recovers kappa."""
        wp = ladder_weight(trivial_component, 4, 0)
        z, _ = z_coordinate(wp, 12)
        specialized = WeightPoint.specialized(trivial_component, z)
        for t1, t2 in [(2, 5), (4, 7)]:
            expected = embed(wp.evaluate(t1, t2, 8), z.field)
            assert specialized.evaluate(t1, t2, 8).equals(expected)

    def test_annulus_error_is_value_error(self):
        """Test the error hierarchy used for exit codes."""
        assert issubclass(AnnulusError, ValueError)
        assert issubclass(WeightError, ValueError)


class TestUniversalCharacter:
    """Test cases for the universal character of a component."""

    def test_series_at_exp_p(self, trivial_component):
        """Test kappa(exp(p), exp(p)^-1) = 1 + X."""
        modulus = 3**20
        gen = exp_p_int(3, 20)
        series = eval_weight_char(trivial_component, gen, pow(gen, -1, modulus), AsSeries(4), 8)
        assert len(series) == 4
        for coeff, expected in zip(series, [1, 1, 0, 0]):
            assert coeff.equals(embed(PadicElement.from_int_absolute(qp(3), expected, 8), coeff.field))

    @pytest.mark.parametrize("t", [2, 4, 5, 7, 11])
    def test_diagonal_is_constant(self, t):
        """Test that kappa(t, t) has no X-dependence."""
        component = make_locally_algebraic(4, 0, p=3).component
        series = eval_weight_char(component, t, t, AsSeries(5), 8)
        assert all(coeff.is_zero() for coeff in series[1:])
        assert not series[0].is_zero()

    def test_annulus_of_a_ramified_component(self):
        """Test 0 < v(z) < 1/2 when c = 1."""
        eta = FiniteCharacter(3, 2, tame=0, wild=1)
        component = WeightComponent(3, 0, eta, (0, 0))
        assert component.c == 1
        assert in_boundary_annulus(PadicElement.uniformizer(radical_field(3, 3), 10), component)
        assert in_boundary_annulus(PadicElement.uniformizer(radical_field(3, 4), 10), component)
        assert not in_boundary_annulus(PadicElement.uniformizer(cyclotomic_field(3, 1), 10), component)
        assert not in_boundary_annulus(PadicElement.from_int(qp(3), 3, 10), component)

    @pytest.mark.parametrize("k, level", [(2, 0), (4, 0), (2, 1), (4, 1)])
    def test_round_trip_on_random_units(self, trivial_component, k, level):
        """Test that the character at z_kappa recovers kappa on random pairs of units."""
        wp = ladder_weight(trivial_component, k, level)
        z, _ = z_coordinate(wp, 12)
        specialized = WeightPoint.specialized(trivial_component, z)
        rng = np.random.default_rng(100 * k + level)
        checked = 0
        while checked < 10:
            t1, t2 = (int(t) for t in rng.integers(1, 3**10, size=2))
            if t1 % 3 == 0 or t2 % 3 == 0:
                continue
            expected = embed(wp.evaluate(t1, t2, 8), z.field)
            assert specialized.evaluate(t1, t2, 8).equals(expected), (t1, t2)
            checked += 1
