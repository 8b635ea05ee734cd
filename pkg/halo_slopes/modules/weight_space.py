"""Weight space components, locally algebraic weights and the universal character."""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from .padic_arith import (
    DEFAULT_PREC,
    PadicElement,
    PrecisionError,
    ValQ,
    binom_coeffs,
    cyclotomic_field,
    embed,
    exp_p_int,
    log_coordinate,
    padic_val,
    phi_prime_power,
    qp,
    root_of_unity_power,
    teichmuller,
    v_p_factorial,
)

logger = logging.getLogger(__name__)

UnitLike = Union[int, PadicElement]


class WeightError(ValueError):
    """Invalid weight data: parity, k < 2, malformed characters, non-units."""


class AnnulusError(ValueError):
    """A point outside the boundary annulus of its component."""


class FiniteCharacter:
    """A finite order character of Z_p^x stored by generator exponents.

    ``tame`` is the exponent of the Teichmuller part (mod p-1) and ``wild``
    gives the image of exp(p) as zeta_{p^(m-1)}^wild for conductor p^m.
    """

    def __init__(self, p: int, conductor: int = 0, tame: int = 0, wild: int = 0):
        tame %= p - 1
        if conductor < 0:
            raise WeightError("conductor exponent must be non-negative")
        if conductor == 0 and (tame or wild):
            raise WeightError("a character of conductor 1 must be trivial")
        if conductor == 1 and (tame == 0 or wild):
            raise WeightError("conductor p needs a nontrivial tame part and no wild part")
        if conductor >= 2:
            wild %= p ** (conductor - 1)
            if wild % p == 0:
                raise WeightError(f"wild exponent {wild} does not give conductor p^{conductor}")
        self.p = p
        self.conductor = conductor
        self.tame = tame
        self.wild = wild if conductor >= 2 else 0

    @property
    def level(self) -> int:
        """The j with values in Q_p(zeta_{p^j})."""
        return self.conductor - 1 if self.conductor >= 2 else 0

    @classmethod
    def trivial(cls, p: int) -> "FiniteCharacter":
        return cls(p)

    @classmethod
    def from_exponents(cls, p: int, tame: int, wild: int, level: int) -> "FiniteCharacter":
        """Normalize exponents given at some level, dropping the level while p | wild."""
        tame %= p - 1
        if level > 0:
            wild %= p**level
            while level > 0 and wild % p == 0:
                if wild == 0:
                    level = 0
                    break
                wild //= p
                level -= 1
        else:
            wild = 0
        if level > 0:
            return cls(p, level + 1, tame, wild)
        return cls(p, 1 if tame else 0, tame, 0)

    @classmethod
    def parse(cls, p: int, text: str) -> "FiniteCharacter":
        """Read "m:tame:wild" (trailing fields optional)."""
        parts = [s for s in text.strip().split(":") if s != ""]
        if not parts or len(parts) > 3:
            raise WeightError(f"cannot read character {text!r}")
        try:
            values = [int(s) for s in parts] + [0] * (3 - len(parts))
        except ValueError as e:
            raise WeightError(f"cannot read character {text!r}: {e}") from e
        return cls(p, *values)

    def __mul__(self, other: "FiniteCharacter") -> "FiniteCharacter":
        if other.p != self.p:
            raise WeightError("characters for different primes")
        level = max(self.level, other.level)
        p = self.p
        wild = self.wild * p ** (level - self.level) + other.wild * p ** (level - other.level)
        return FiniteCharacter.from_exponents(p, self.tame + other.tame, wild, level)

    def inverse(self) -> "FiniteCharacter":
        return FiniteCharacter.from_exponents(self.p, -self.tame, -self.wild, self.level)

    def __truediv__(self, other: "FiniteCharacter") -> "FiniteCharacter":
        return self * other.inverse()

    def is_trivial(self) -> bool:
        return self.conductor == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteCharacter):
            return NotImplemented
        return (self.p, self.conductor, self.tame, self.wild) == (
            other.p,
            other.conductor,
            other.tame,
            other.wild,
        )

    def __hash__(self) -> int:
        return hash((self.p, self.conductor, self.tame, self.wild))

    def __repr__(self) -> str:
        return f"FiniteCharacter(p={self.p}, m={self.conductor}, tame={self.tame}, wild={self.wild})"

    @property
    def descriptor(self) -> str:
        return f"{self.conductor}:{self.tame}:{self.wild}"

    def wild_value(self, coordinate: int, prec: int = DEFAULT_PREC) -> PadicElement:
        """Value on the 1-unit exp(p)^coordinate."""
        return root_of_unity_power(self.p, self.level, self.wild * coordinate, prec)

    def value_at_exp_p(self, prec: int = DEFAULT_PREC) -> PadicElement:
        return self.wild_value(1, prec)

    def evaluate(self, t: int, prec: int = DEFAULT_PREC) -> PadicElement:
        """Value at a unit t of Z_p, in Q_p(zeta_{p^level})."""
        p = self.p
        if t % p == 0:
            raise WeightError(f"{t} is not a unit")
        tame = pow(teichmuller(t, p, prec), self.tame, p**prec) if self.tame else 1
        if self.level == 0:
            return PadicElement.from_int_absolute(qp(p), tame, prec)
        coordinate = log_coordinate(t, p, self.level)
        return self.wild_value(coordinate, prec) * tame

    def to_dict(self) -> Dict[str, int]:
        return {"conductor": self.conductor, "tame": self.tame, "wild": self.wild}


class WeightComponent:
    """A component (eta, omega) of weight space, eta(t) = t^w eta~(t)."""

    def __init__(self, p: int, w: int, eta: FiniteCharacter, omega: Tuple[int, int]):
        if eta.p != p:
            raise WeightError("eta~ is defined for another prime")
        omega = (omega[0] % (p - 1), omega[1] % (p - 1))
        if (omega[0] + omega[1] - w - eta.tame) % (p - 1):
            raise WeightError(
                f"omega {omega} does not restrict to eta on the diagonal (w={w}, tame={eta.tame})"
            )
        self.p = p
        self.w = w
        self.eta = eta
        self.omega = omega

    @property
    def c(self) -> int:
        """E_eta = Q_p(zeta_{p^c})."""
        return self.eta.level

    @property
    def field(self):
        return cyclotomic_field(self.p, self.c)

    @property
    def varpi_valuation(self) -> Fraction:
        """v_p of a uniformizer of E_eta."""
        return Fraction(1, phi_prime_power(self.p, self.c))

    @property
    def s0(self) -> int:
        return 1 if self.w % 2 == 0 else 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightComponent):
            return NotImplemented
        return (self.p, self.w, self.eta, self.omega) == (other.p, other.w, other.eta, other.omega)

    def __hash__(self) -> int:
        return hash((self.p, self.w, self.eta, self.omega))

    def __repr__(self) -> str:
        return f"WeightComponent(p={self.p}, w={self.w}, eta={self.eta.descriptor}, omega={self.omega})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "w": self.w,
            "eta": self.eta.to_dict(),
            "omega": list(self.omega),
            "c": self.c,
        }


class AtZ:
    """Evaluation mode: the universal character at X = z."""

    def __init__(self, z: PadicElement):
        self.z = z


class AsSeries:
    """Evaluation mode: the universal character as a series in X truncated at X^xprec."""

    def __init__(self, xprec: int):
        if xprec < 1:
            raise ValueError("xprec must be positive")
        self.xprec = xprec


class WeightPoint:
    """A point of weight space: locally algebraic (k, eps) or specialized at z."""

    def __init__(
        self,
        component: WeightComponent,
        k: Optional[int] = None,
        eps: Optional[Tuple[FiniteCharacter, FiniteCharacter]] = None,
        z: Optional[PadicElement] = None,
    ):
        if (k is None) == (z is None):
            raise WeightError("a weight point is either locally algebraic or specialized")
        self.component = component
        self.k = k
        self.eps = eps
        self.z = z

    @classmethod
    def specialized(cls, component: WeightComponent, z: PadicElement) -> "WeightPoint":
        return cls(component, z=z)

    @property
    def p(self) -> int:
        return self.component.p

    @property
    def w(self) -> int:
        return self.component.w

    @property
    def is_locally_algebraic(self) -> bool:
        return self.k is not None

    @property
    def exponents(self) -> Tuple[int, int]:
        """(A, B) with chi_k(t1, t2) = t1^A t2^B."""
        if self.k is None:
            raise WeightError("specialized points have no algebraic exponents")
        return (self.w + self.k - 2) // 2, (self.w - self.k + 2) // 2

    @property
    def coordinate_level(self) -> int:
        """z_kappa lies in Q_p(zeta_{p^level})."""
        if self.eps is None:
            return self.z.field.level if self.z.field.kind == "cyclotomic" else 0
        return (self.eps[0] / self.eps[1]).level

    @property
    def field(self):
        """Field holding the values of the character."""
        if self.z is not None:
            return self.z.field
        level = max(self.component.c, self.eps[0].level, self.eps[1].level)
        return cyclotomic_field(self.p, level)

    def evaluate(self, t1: UnitLike, t2: UnitLike, prec: int = DEFAULT_PREC) -> PadicElement:
        """kappa(t1, t2) as an element of ``self.field``."""
        if self.z is not None:
            return eval_weight_char(self.component, t1, t2, AtZ(self.z), prec)
        p = self.p
        a, b = _unit_int(t1, p, prec), _unit_int(t2, p, prec)
        modulus = p**prec
        big_a, big_b = self.exponents
        algebraic = pow(a, big_a, modulus) * pow(b, big_b, modulus) % modulus
        field = self.field
        value = embed(self.eps[0].evaluate(a, prec), field) * embed(self.eps[1].evaluate(b, prec), field)
        return value * algebraic

    @property
    def descriptor(self) -> str:
        if self.k is None:
            return f"z in {self.z.field!r}, v(z)={padic_val(self.z)}"
        return f"k={self.k},w={self.w},eps=({self.eps[0].descriptor},{self.eps[1].descriptor})"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"component": self.component.to_dict()}
        if self.k is not None:
            data.update(
                {"k": self.k, "eps": [self.eps[0].to_dict(), self.eps[1].to_dict()]}
            )
        else:
            data["z_valuation"] = str(padic_val(self.z))
        return data


def _unit_int(t: UnitLike, p: int, digits: int) -> int:
    if isinstance(t, PadicElement):
        if t.field.e != 1:
            raise WeightError("weight characters take arguments in Z_p")
        if not t.is_unit():
            raise WeightError(f"{t!r} is not a unit")
        if t.precision < digits:
            raise PrecisionError(
                f"argument known to {t.precision} digits, {digits} needed",
                required=digits,
                available=t.precision,
            )
        return t.lift()
    if t % p == 0:
        raise WeightError(f"{t} is not a unit at {p}")
    return t


def make_locally_algebraic(
    k: int,
    w: int,
    eps: Optional[Tuple[FiniteCharacter, FiniteCharacter]] = None,
    p: Optional[int] = None,
) -> WeightPoint:
    """The weight t1^((w+k-2)/2) t2^((w-k+2)/2) eps(t1, t2) with its component."""
    if eps is None:
        if p is None:
            raise WeightError("need p or a character pair")
        eps = (FiniteCharacter.trivial(p), FiniteCharacter.trivial(p))
    p = eps[0].p
    if eps[1].p != p:
        raise WeightError("characters for different primes")
    if k < 2:
        raise WeightError(f"k must be at least 2, got {k}")
    if (k - w) % 2:
        raise WeightError(f"parity mismatch: k={k} and w={w} must agree mod 2")
    big_a = (w + k - 2) // 2
    big_b = (w - k + 2) // 2
    eta = eps[0] * eps[1]
    omega = (big_a + eps[0].tame, big_b + eps[1].tame)
    component = WeightComponent(p, w, eta, omega)
    return WeightPoint(component, k=k, eps=eps)


def z_coordinate(wp: WeightPoint, prec: int = DEFAULT_PREC) -> Tuple[PadicElement, ValQ]:
    """z = exp(p)^(k-2) (eps1/eps2)(exp(p)) - 1 and its valuation."""
    if not wp.is_locally_algebraic:
        raise WeightError("z_coordinate needs a locally algebraic weight")
    p = wp.p
    ratio = wp.eps[0] / wp.eps[1]
    field = cyclotomic_field(p, ratio.level)
    if wp.k == 2 and ratio.level == 0:
        return PadicElement.zero(field, prec), ValQ.infinity()
    power = pow(exp_p_int(p, prec + 1), wp.k - 2, p ** (prec + 1))
    value = ratio.value_at_exp_p(prec + 1) * power
    z = (value - 1).with_precision(prec)
    return z, padic_val(z)


def power_digits(z: PadicElement, prec: int) -> int:
    """K with (1+z)^(p^K) = 1 mod p^prec."""
    v = padic_val(z)
    if not v.exact:
        return 0
    if v.value <= 0:
        raise WeightError("the universal character needs v_p(z) > 0")
    nu = v.value
    digits = 0
    while nu < prec:
        nu = min(z.p * nu, nu + 1)
        digits += 1
    return digits


def eval_weight_char(
    comp: WeightComponent,
    t1: UnitLike,
    t2: UnitLike,
    mode: Union[AtZ, AsSeries],
    prec: int = DEFAULT_PREC,
) -> Union[PadicElement, List[PadicElement]]:
    """omega(delta1, delta2) eta(s) (1+X)^(log(u)/p) at X = z or as a truncated series."""
    p = comp.p
    if isinstance(mode, AsSeries):
        digits = prec + v_p_factorial(mode.xprec - 1, p) + 1
    else:
        digits = max(prec, power_digits(mode.z, prec)) + 1
    a, b = _unit_int(t1, p, digits + 1), _unit_int(t2, p, digits + 1)
    modulus = p**prec
    work = p**digits
    half = pow(2, -1, work)
    la, lb = log_coordinate(a, p, digits), log_coordinate(b, p, digits)
    s_coord = (la + lb) * half % work
    alpha = (la - lb) * half % work

    tame = pow(teichmuller(a, p, prec), comp.omega[0], modulus)
    tame = tame * pow(teichmuller(b, p, prec), comp.omega[1], modulus) % modulus
    s_power = pow(exp_p_int(p, prec), comp.w * s_coord % p**prec, modulus)
    constant = comp.eta.wild_value(s_coord, prec) * (tame * s_power % modulus)

    if isinstance(mode, AsSeries):
        coeffs = binom_coeffs(PadicElement.from_int_absolute(qp(p), alpha, digits), mode.xprec)
        return [(constant * embed(c, comp.field)).with_precision(prec) for c in coeffs]

    z = mode.z
    if z.is_zero():
        return embed(constant, z.field).with_precision(prec)
    exponent = alpha % p ** power_digits(z, prec)
    result = embed(constant, z.field) * ((z + 1) ** exponent)
    return result.with_precision(prec)


def in_boundary_annulus(z: PadicElement, comp: WeightComponent) -> bool:
    """0 < v_p(z) < v_p(varpi_E)."""
    v = padic_val(z)
    if not v.exact or v.is_infinite:
        return False
    return 0 < v.value < comp.varpi_valuation


def ladder_weight(comp: WeightComponent, k: int, level: int) -> WeightPoint:
    """A weight of weight (k, w) in ``comp`` whose eps-ratio has conductor p^(level+2)."""
    if level < comp.c:
        raise WeightError(f"level {level} is below the field level {comp.c} of the component")
    if k < 2 or (k - comp.w) % 2:
        raise WeightError(f"weight k={k} does not match w={comp.w}")
    p = comp.p
    big_a = (comp.w + k - 2) // 2
    tame = (comp.omega[0] - big_a - comp.eta.tame) % (p - 1)
    chi = FiniteCharacter(p, level + 2, tame, 1)
    wp = make_locally_algebraic(k, comp.w, (comp.eta * chi, chi.inverse()))
    if wp.component != comp:
        raise WeightError("ladder weight left its component")
    return wp
