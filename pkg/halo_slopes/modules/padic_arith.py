"""Bounded-precision arithmetic in Z_p, Q_p and totally ramified extensions."""

import logging
import math
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

DEFAULT_PREC = 20

Rational = Union[int, Fraction]


class PrecisionError(ArithmeticError):
    """Raised when a computation needs more precision than is tracked."""

    def __init__(
        self,
        message: str,
        required: Optional[Rational] = None,
        available: Optional[Rational] = None,
    ):
        super().__init__(message)
        self.required = required
        self.available = available


def v_p_int(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def v_p_factorial(n: int, p: int) -> int:
    """Legendre's formula for v_p(n!)."""
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def log_floor(n: int, p: int) -> int:
    """Largest L with p^L <= n, for n >= 1."""
    if n < 1:
        raise ValueError("log_floor needs a positive integer")
    out = 0
    q = p
    while q <= n:
        q *= p
        out += 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def phi_prime_power(p: int, c: int) -> int:
    """Euler phi of p^c, with phi(p^0) = 1."""
    if c <= 0:
        return 1
    return (p - 1) * p ** (c - 1)


@total_ordering
class ValQ:
    """A rational valuation, the value infinity, or a lower bound "at least N"."""

    def __init__(self, value: Optional[Rational] = None, exact: bool = True):
        self.value = None if value is None else Fraction(value)
        self.exact = True if value is None else exact

    @classmethod
    def infinity(cls) -> "ValQ":
        return cls(None)

    @classmethod
    def at_least(cls, bound: Rational) -> "ValQ":
        return cls(bound, exact=False)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def numerator(self) -> int:
        if self.value is None:
            raise ValueError("infinite valuation has no numerator")
        return self.value.numerator

    @property
    def denominator(self) -> int:
        if self.value is None:
            raise ValueError("infinite valuation has no denominator")
        return self.value.denominator

    def _key(self) -> Tuple[int, Fraction, int]:
        if self.value is None:
            return (1, Fraction(0), 0)
        return (0, self.value, 0 if self.exact else 1)

    @staticmethod
    def _coerce(other) -> "ValQ":
        if isinstance(other, ValQ):
            return other
        if isinstance(other, (int, Fraction)):
            return ValQ(other)
        return NotImplemented

    def __add__(self, other) -> "ValQ":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.value is None or other.value is None:
            return ValQ.infinity()
        return ValQ(self.value + other.value, self.exact and other.exact)

    __radd__ = __add__

    def scale(self, factor: Rational) -> "ValQ":
        """Multiply by a positive rational."""
        if self.value is None:
            return self
        return ValQ(self.value * factor, self.exact)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __str__(self) -> str:
        if self.value is None:
            return "inf"
        prefix = "" if self.exact else ">="
        return f"{prefix}{self.value}"

    def __repr__(self) -> str:
        return f"ValQ({self})"


class RamifiedExtension:
    """Totally ramified extension Q_p[pi]/(f) with f an Eisenstein polynomial.

    ``poly`` lists the coefficients f_0, ..., f_e of a monic polynomial.
    ``kind`` is one of "qp", "cyclotomic" or "radical"; ``level`` is the
    cyclotomic level j (pi = zeta_{p^j} - 1) or the radical degree.
    """

    def __init__(self, p: int, poly: Sequence[int], kind: str = "custom", level: int = 0):
        if p < 3 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        poly = tuple(int(c) for c in poly)
        if len(poly) < 2 or poly[-1] != 1:
            raise ValueError("Eisenstein polynomial must be monic of degree >= 1")
        if any(c % p for c in poly[:-1]) or poly[0] % (p * p) == 0:
            raise ValueError(f"polynomial {poly} is not Eisenstein at {p}")
        self.p = p
        self.poly = poly
        self.e = len(poly) - 1
        self.kind = kind
        self.level = level

    @property
    def uniformizer_valuation(self) -> Fraction:
        return Fraction(1, self.e)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RamifiedExtension):
            return NotImplemented
        return self.p == other.p and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.p, self.poly))

    def __repr__(self) -> str:
        if self.kind == "qp":
            return f"Q_{self.p}"
        if self.kind == "cyclotomic":
            return f"Q_{self.p}(zeta_{self.p}^{self.level})"
        if self.kind == "radical":
            return f"Q_{self.p}({self.p}^(1/{self.level}))"
        return f"Q_{self.p}[x]/{self.poly}"

    def to_dict(self):
        return {"p": self.p, "e": self.e, "kind": self.kind, "level": self.level}


@lru_cache(maxsize=None)
def qp(p: int) -> RamifiedExtension:
    return RamifiedExtension(p, (-p, 1), kind="qp", level=0)


@lru_cache(maxsize=None)
def cyclotomic_field(p: int, level: int) -> RamifiedExtension:
    """Q_p(zeta_{p^level}) with uniformizer zeta - 1."""
    if level <= 0:
        return qp(p)
    step = p ** (level - 1)
    degree = (p - 1) * step
    coeffs = [0] * (degree + 1)
    for i in range(p):
        n = i * step
        for j in range(n + 1):
            coeffs[j] += math.comb(n, j)
    return RamifiedExtension(p, coeffs, kind="cyclotomic", level=level)


@lru_cache(maxsize=None)
def radical_field(p: int, e: int) -> RamifiedExtension:
    """Q_p(p^(1/e))."""
    if e <= 1:
        return qp(p)
    return RamifiedExtension(p, (-p,) + (0,) * (e - 1) + (1,), kind="radical", level=e)


def eisenstein_reduce(coeffs: List[int], poly: Tuple[int, ...]) -> List[int]:
    """Reduce a pi-polynomial of any length to the basis 1, ..., pi^(e-1)."""
    e = len(poly) - 1
    c = list(coeffs)
    for i in range(len(c) - 1, e - 1, -1):
        top = c[i]
        if top:
            base = i - e
            for j in range(e):
                if poly[j]:
                    c[base + j] -= top * poly[j]
    c = c[:e]
    if len(c) < e:
        c.extend([0] * (e - len(c)))
    return c


def poly_mul(a: Sequence[int], b: Sequence[int]) -> List[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class PadicElement:
    """An element p^(-s) * sum(c_i pi^i) of a ramified extension, known modulo pi^prec.

    ``prec`` is the absolute precision in pi-units (v_p-precision times e).
    Instances are immutable.
    """

    __slots__ = ("field", "coeffs", "shift", "prec")

    def __init__(self, field: RamifiedExtension, coeffs: Sequence[int], shift: int, prec: int):
        p, e = field.p, field.e
        coeffs = list(coeffs) + [0] * (e - len(coeffs))
        modexp = _ceil_div(prec + e * shift, e)
        if modexp <= 0:
            coeffs = [0] * e
            shift = 0
        else:
            modulus = p**modexp
            coeffs = [c % modulus for c in coeffs]
            while shift > 0 and all(c % p == 0 for c in coeffs):
                coeffs = [c // p for c in coeffs]
                shift -= 1
        if shift < 0:
            scale = p ** (-shift)
            coeffs = [c * scale for c in coeffs]
            shift = 0
            modexp = _ceil_div(prec, e)
            if modexp > 0:
                coeffs = [c % p**modexp for c in coeffs]
        self.field = field
        self.coeffs = tuple(coeffs)
        self.shift = shift
        self.prec = prec

    # construction

    @classmethod
    def from_int(cls, field: RamifiedExtension, n: int, prec: int = DEFAULT_PREC) -> "PadicElement":
        """Embed an integer with relative precision ``prec`` (v_p-units)."""
        e = field.e
        rel = prec if n == 0 else v_p_int(n, field.p) + prec
        return cls(field, [n], 0, e * rel)

    @classmethod
    def from_int_absolute(cls, field: RamifiedExtension, n: int, prec: int) -> "PadicElement":
        return cls(field, [n], 0, field.e * prec)

    @classmethod
    def from_fraction(cls, field: RamifiedExtension, x: Rational, prec: int = DEFAULT_PREC) -> "PadicElement":
        x = Fraction(x)
        num = cls.from_int(field, x.numerator, prec)
        if x.denominator == 1:
            return num
        return num / cls.from_int(field, x.denominator, prec)

    @classmethod
    def zero(cls, field: RamifiedExtension, prec: int = DEFAULT_PREC) -> "PadicElement":
        return cls(field, [0], 0, field.e * prec)

    @classmethod
    def one(cls, field: RamifiedExtension, prec: int = DEFAULT_PREC) -> "PadicElement":
        return cls(field, [1], 0, field.e * prec)

    @classmethod
    def uniformizer(cls, field: RamifiedExtension, prec: int = DEFAULT_PREC) -> "PadicElement":
        if field.e == 1:
            return cls(field, [field.p], 0, prec + 1)
        return cls(field, [0, 1], 0, field.e * prec + 1)

    @classmethod
    def from_coeffs(
        cls, field: RamifiedExtension, coeffs: Sequence[int], prec: int = DEFAULT_PREC, shift: int = 0
    ) -> "PadicElement":
        """Element sum(coeffs[i] pi^i) / p^shift with absolute precision ``prec`` (v_p-units)."""
        if len(coeffs) > field.e:
            coeffs = eisenstein_reduce(list(coeffs), field.poly)
        return cls(field, coeffs, shift, field.e * prec)

    # inspection

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def e(self) -> int:
        return self.field.e

    @property
    def precision(self) -> Fraction:
        """Absolute precision in v_p-units."""
        return Fraction(self.prec, self.field.e)

    def valuation_pi(self) -> Optional[int]:
        """Exact pi-adic valuation, or None when the element is indistinguishable from 0."""
        p, e = self.field.p, self.field.e
        best = None
        for i, c in enumerate(self.coeffs):
            if c:
                v = e * v_p_int(c, p) + i
                if best is None or v < best:
                    best = v
        if best is None:
            return None
        best -= e * self.shift
        if best >= self.prec:
            return None
        return best

    def _val_lower(self) -> int:
        v = self.valuation_pi()
        return self.prec if v is None else v

    def is_zero(self) -> bool:
        """True when the element is 0 at its tracked precision."""
        return self.valuation_pi() is None

    def is_integral(self) -> bool:
        return self.shift == 0

    def is_unit(self) -> bool:
        return self.valuation_pi() == 0

    def lift(self) -> int:
        """Non-negative integer representative of an element of Z_p."""
        if self.field.e != 1:
            raise ValueError("lift is only defined on Q_p")
        if self.shift:
            raise ValueError("element is not integral")
        return self.coeffs[0]

    def residue_coeffs(self, prec: int) -> List[int]:
        """pi-basis coefficients modulo p^prec of an integral element."""
        if self.shift:
            raise ValueError("element is not integral")
        if self.prec < self.field.e * prec:
            raise PrecisionError(
                f"element known to {self.precision} but {prec} digits needed",
                required=prec,
                available=self.precision,
            )
        modulus = self.field.p**prec
        return [c % modulus for c in self.coeffs]

    # arithmetic

    def _coerce(self, other) -> "PadicElement":
        if isinstance(other, PadicElement):
            if other.field != self.field:
                raise ValueError(f"field mismatch: {self.field} vs {other.field}")
            return other
        if isinstance(other, int):
            e = self.field.e
            vn = v_p_int(other, self.field.p) if other else 0
            prec = max(self.prec, 0) + e * (vn + 2 * self.shift + 1)
            return PadicElement(self.field, [other], 0, prec)
        if isinstance(other, Fraction):
            p, e = self.field.p, self.field.e
            digits = _ceil_div(max(self.prec, 0), e) + self.shift + 2
            digits += v_p_int(other.denominator, p) * 2
            num = PadicElement.from_int(self.field, other.numerator, digits)
            return num / PadicElement.from_int(self.field, other.denominator, digits)
        return NotImplemented

    def _aligned(self, other: "PadicElement") -> Tuple[List[int], List[int], int]:
        p = self.field.p
        s = max(self.shift, other.shift)
        a = [c * p ** (s - self.shift) for c in self.coeffs]
        b = [c * p ** (s - other.shift) for c in other.coeffs]
        return a, b, s

    def __add__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, s = self._aligned(other)
        return PadicElement(self.field, [x + y for x, y in zip(a, b)], s, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self) -> "PadicElement":
        return PadicElement(self.field, [-c for c in self.coeffs], self.shift, self.prec)

    def __sub__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        prec = min(self.prec + other._val_lower(), other.prec + self._val_lower())
        coeffs = eisenstein_reduce(poly_mul(self.coeffs, other.coeffs), self.field.poly)
        return PadicElement(self.field, coeffs, self.shift + other.shift, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElement":
        v = self.valuation_pi()
        if v is None:
            raise PrecisionError(
                "division by an element indistinguishable from 0",
                available=self.precision,
            )
        field = self.field
        p, e = field.p, field.e
        m = v + e * self.shift
        j, q = m % e, m // e
        shifted = eisenstein_reduce([0] * (e - j) + list(self.coeffs), field.poly) if j else [
            c for c in self.coeffs
        ]
        if j == 0:
            # m = e*q so dividing by p^q leaves a unit
            unit = [c // p**q for c in shifted]
            head = [1]
            out_shift = q - self.shift
        else:
            unit = [c // p ** (q + 1) for c in shifted]
            head = [0] * (e - j) + [1]
            out_shift = q + 1 - self.shift
        prec = self.prec - 2 * v
        digits = max(1, _ceil_div(prec + e * max(out_shift, 0), e) + 1)
        inv_unit = _unit_inverse(unit, field, digits)
        coeffs = eisenstein_reduce(poly_mul(head, inv_unit), field.poly)
        return PadicElement(field, coeffs, out_shift, prec)

    def __truediv__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "PadicElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> "PadicElement":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return PadicElement(self.field, [1], 0, max(self.prec, self.field.e))
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def equals(self, other) -> bool:
        """Congruence modulo the smaller of the two precisions."""
        return (self - other).is_zero()

    def with_precision(self, prec: Rational) -> "PadicElement":
        """Lower the absolute precision to ``prec`` v_p-units."""
        prec_pi = int(math.floor(Fraction(prec) * self.field.e))
        return PadicElement(self.field, self.coeffs, self.shift, min(self.prec, prec_pi))

    def __repr__(self) -> str:
        terms = " + ".join(f"{c}*pi^{i}" for i, c in enumerate(self.coeffs) if c) or "0"
        scale = f"/p^{self.shift}" if self.shift else ""
        return f"({terms}){scale} + O(pi^{self.prec}) in {self.field!r}"


def _unit_inverse(unit: Sequence[int], field: RamifiedExtension, digits: int) -> List[int]:
    """Inverse of a pi-adic unit modulo p^digits by Newton iteration."""
    p, e = field.p, field.e
    modulus = p**digits
    u0 = unit[0] % p
    if u0 == 0:
        raise PrecisionError("expected a unit")
    r = [pow(u0, -1, p)] + [0] * (e - 1)
    known = 1
    target = e * digits
    while known < target:
        ur = eisenstein_reduce(poly_mul(unit, r), field.poly)
        corr = [(-c) % modulus for c in ur]
        corr[0] = (corr[0] + 2) % modulus
        r = [c % modulus for c in eisenstein_reduce(poly_mul(r, corr), field.poly)]
        known *= 2
    return r


# Z_p integer kernels


def teichmuller(a: int, p: int, prec: int) -> int:
    """Teichmuller representative of a unit, modulo p^prec."""
    modulus = p**prec
    if a % p == 0:
        raise ValueError(f"{a} is not a unit at {p}")
    return pow(a, p ** (prec - 1), modulus)


def one_unit_part(a: int, p: int, prec: int) -> int:
    """<a> = a / teichmuller(a), modulo p^prec."""
    modulus = p**prec
    return a * pow(teichmuller(a, p, prec), -1, modulus) % modulus


def plog_int(u: int, p: int, prec: int) -> int:
    """log(u) modulo p^prec for an integer u = 1 mod p."""
    if (u - 1) % p:
        raise ValueError(f"{u} is not a 1-unit at {p}")
    n_max = prec + prec.bit_length() + 2
    extra = 0
    q = p
    while q <= n_max:
        extra += 1
        q *= p
    work = p ** (prec + extra)
    modulus = p**prec
    y = (u - 1) % work
    total = 0
    power = 1
    for n in range(1, n_max + 1):
        power = power * y % work
        if power == 0:
            break
        vn = v_p_int(n, p)
        term = power // p**vn
        term = term * pow(n // p**vn, -1, modulus) % modulus
        total = total + term if n % 2 else total - term
    return total % modulus


def exp_int(x: int, p: int, prec: int) -> int:
    """exp(x) modulo p^prec for x = 0 mod p."""
    if x % p:
        raise ValueError("exponential series needs x = 0 mod p")
    n_max = 2 * prec + 2
    extra = v_p_factorial(n_max, p)
    work = p ** (prec + extra)
    modulus = p**prec
    total = 1
    power = 1
    fact_unit = 1
    fact_v = 0
    for n in range(1, n_max + 1):
        power = power * x % work
        vn = v_p_int(n, p)
        fact_v += vn
        fact_unit = fact_unit * (n // p**vn) % modulus
        term = power // p**fact_v
        total = (total + term * pow(fact_unit, -1, modulus)) % modulus
    return total % modulus


@lru_cache(maxsize=None)
def exp_p_int(p: int, prec: int) -> int:
    """exp(p) modulo p^prec, the canonical generator of 1 + pZ_p."""
    return exp_int(p, p, prec)


def exp_p(p: int, prec: int = DEFAULT_PREC) -> PadicElement:
    return PadicElement.from_int_absolute(qp(p), exp_p_int(p, prec), prec)


def log_coordinate(t: int, p: int, prec: int) -> int:
    """a(t) with <t> = exp(p)^a(t), i.e. log<t>/p, modulo p^prec."""
    u = one_unit_part(t, p, prec + 1)
    return plog_int(u, p, prec + 1) // p % p**prec


# public operations


def padic_val(x: PadicElement) -> ValQ:
    """Exact rational valuation if below precision, else an "at least" marker."""
    v = x.valuation_pi()
    if v is None:
        return ValQ.at_least(x.precision)
    return ValQ(Fraction(v, x.field.e))


def ext_arith(a: PadicElement, b: PadicElement, op: str) -> PadicElement:
    """Dispatch one of add, sub, mul, div."""
    if a.field != b.field:
        raise ValueError("operands live in different extensions")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def plog(u: PadicElement) -> PadicElement:
    """p-adic logarithm of a 1-unit."""
    y = u - 1
    vy = padic_val(y)
    if vy.exact and vy < 1:
        raise ValueError(f"{u!r} is not a 1-unit")
    field = u.field
    if field.e == 1 and u.shift == 0:
        digits = max(int(math.floor(u.precision)), 0)
        if digits == 0:
            return PadicElement.zero(field, 0)
        return PadicElement.from_int_absolute(field, plog_int(u.lift(), field.p, digits), digits)
    if y.is_zero():
        return PadicElement(field, [0], 0, y.prec)
    target = u.precision
    total = y
    power = y
    n = 1
    lower = vy.value if vy.exact else target
    while True:
        n += 1
        if n * lower - log_floor(n, field.p) > target + 1:
            break
        power = power * y
        term = power / n
        total = total + term if n % 2 else total - term
    return total.with_precision(min(target, y.precision))


def binom_coeffs(a: PadicElement, count: int) -> List[PadicElement]:
    """Binomial coefficients C(a, j), j < count, for a in Z_p."""
    if a.field.e != 1 or a.shift:
        raise ValueError("binomial coefficients need a in Z_p")
    field = a.field
    rep = a.lift()
    out = []
    for j in range(count):
        prec = a.prec - v_p_factorial(j, field.p)
        out.append(PadicElement(field, [math.comb(rep, j)], 0, prec))
    return out


def embed(x: PadicElement, target: RamifiedExtension) -> PadicElement:
    """Image of ``x`` in a larger extension (Q_p into anything, cyclotomic into higher level)."""
    source = x.field
    if source == target:
        return x
    if source.p != target.p:
        raise ValueError("cannot embed across primes")
    ratio = target.e // source.e
    prec = x.prec * ratio
    if source.e == 1:
        return PadicElement(target, [x.coeffs[0]], x.shift, prec)
    if source.kind == "cyclotomic" and target.kind == "cyclotomic" and target.level >= source.level:
        digits = _ceil_div(prec + target.e * x.shift, target.e) + 1
        image = _cyclotomic_pi_image(source.p, source.level, target.level, digits)
        result = [0] * target.e
        for c in reversed(x.coeffs):
            result = eisenstein_reduce(poly_mul(result, image), target.poly)
            result[0] += c
        return PadicElement(target, result, x.shift, prec)
    raise ValueError(f"no embedding of {source!r} into {target!r}")


@lru_cache(maxsize=None)
def _cyclotomic_pi_image(p: int, low: int, high: int, digits: int) -> List[int]:
    """(1 + pi_high)^(p^(high-low)) - 1 in the pi_high basis, modulo p^digits."""
    field = cyclotomic_field(p, high)
    modulus = p**digits
    zeta = [1, 1] + [0] * (field.e - 2)
    for _ in range(high - low):
        acc = [1] + [0] * (field.e - 1)
        for _ in range(p):
            acc = [c % modulus for c in eisenstein_reduce(poly_mul(acc, zeta), field.poly)]
        zeta = acc
    image = list(zeta)
    image[0] -= 1
    return [c % modulus for c in image]


@lru_cache(maxsize=None)
def root_of_unity_power(p: int, level: int, n: int, prec: int) -> PadicElement:
    """zeta_{p^level}^n in Q_p(zeta_{p^level}), zeta = 1 + pi."""
    field = cyclotomic_field(p, level)
    if level == 0:
        return PadicElement.one(field, prec)
    n %= p**level
    zeta = PadicElement(field, [1, 1], 0, field.e * prec + field.e * 2)
    return (zeta**n).with_precision(prec)
