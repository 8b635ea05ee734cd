"""Truncated distribution modules and the Hecke matrices acting on them.

Functions on pZ_p are truncated to x^0..x^(M-1); distributions are stored by
their moments mu(x^j). A single coset gamma = [[a, b], [c, d]] at v acts on
functions by

    (f . gamma)(x) = kappa(a + bx, u / (a + bx)) f((c + d x) / (a + bx)),

with u = det / p^v(det). The character splits as kappa(a, u / a) times the
factor K(x) = kappa(1 + beta x, (1 + beta x)^-1), beta = b / a, and K = 1 when
b = 0. In the row-vector convention used for all matrices here, a moment
vector mu maps to mu . F with F[i][j] = coefficient of x^i in
kappa(a, u/a) K(x) ((c + d x) / (a + bx))^j.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from .coset_data import CosetDataset, DatasetError, HeckeItem, LocalMatrix, dataset_digest
from .padic_arith import (
    PadicElement,
    PrecisionError,
    ValQ,
    embed,
    log_floor,
    padic_val,
    qp,
    v_p_factorial,
    v_p_int,
)
from .truncated_ring import TruncatedRing, matrix_zero
from .weight_space import (
    AsSeries,
    FiniteCharacter,
    WeightComponent,
    WeightError,
    WeightPoint,
    eval_weight_char,
    make_locally_algebraic,
    power_digits,
)

logger = logging.getLogger(__name__)

DEFAULT_MOMENTS = 24
DEFAULT_XPREC = 12
DEFAULT_MAX_DIM = 4096

Weight = Union[WeightComponent, WeightPoint]


class DimensionError(ValueError):
    """A matrix would exceed the configured dimension cap, or a truncation is too small."""


class FunctionTrunc:
    """f(x) = sum a_j x^j on pZ_p, truncated at degree M."""

    def __init__(self, ring: TruncatedRing, coeffs: Sequence[int]):
        self.ring = ring
        self.coeffs = list(coeffs)

    @classmethod
    def monomial(cls, ring: TruncatedRing, j: int, moments: int) -> "FunctionTrunc":
        coeffs = [0] * moments
        coeffs[j] = ring.one
        return cls(ring, coeffs)

    @property
    def moments(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionTrunc):
            return NotImplemented
        return self.coeffs == other.coeffs


class DistTrunc:
    """A distribution given by its moments mu(x^j), j < M."""

    def __init__(self, ring: TruncatedRing, moments: Sequence[int]):
        self.ring = ring
        self.values = list(moments)

    @property
    def moments(self) -> int:
        return len(self.values)

    def pair(self, f: FunctionTrunc) -> int:
        """The moment pairing mu(f)."""
        return self.ring.dot(self.values, f.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DistTrunc):
            return NotImplemented
        return self.values == other.values


class AlgebraicCoeffModule:
    """det^((w-k+2)/2) Sym^(k-2) at each non-varying place, tensored together."""

    def __init__(self, p: int, k_list: Sequence[int], w: int):
        for k in k_list:
            if k < 2 or (k - w) % 2:
                raise WeightError(f"fixed weight {k} does not match w={w}")
        self.p = p
        self.k_list = tuple(k_list)
        self.w = w

    @property
    def dims(self) -> List[int]:
        return [k - 1 for k in self.k_list]

    @property
    def dimension(self) -> int:
        out = 1
        for n in self.dims:
            out *= n
        return out

    def item_matrix(self, item: HeckeItem, u_place: Optional[int], prec: int) -> List[List[int]]:
        """Kronecker product of the actions at places 1..d-1 (integer entries mod p^prec)."""
        out = [[1]]
        for place, k in enumerate(self.k_list, start=1):
            local = algebraic_matrix(item.matrices[place], k, self.w, self.p, prec, normalize=u_place == place)
            out = kron(out, local, self.p**prec)
        return out


def kron(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], modulus: Optional[int] = None) -> List[List[int]]:
    rows_b, cols_b = len(b), len(b[0])
    out = [[0] * (len(a[0]) * cols_b) for _ in range(len(a) * rows_b)]
    for i, row_a in enumerate(a):
        for j, x in enumerate(row_a):
            if not x:
                continue
            for r, row_b in enumerate(b):
                target = out[i * rows_b + r]
                for s, y in enumerate(row_b):
                    if y:
                        value = x * y
                        target[j * cols_b + s] = value % modulus if modulus else value
    return out


def _poly_mul_trunc(a: List[int], b: Sequence[int], length: int, modulus: int) -> List[int]:
    out = [0] * min(len(a) + len(b) - 1, length)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if i + j >= length:
                break
            out[i + j] = (out[i + j] + x * y) % modulus
    return out


def algebraic_matrix(
    m: LocalMatrix, k: int, w: int, p: int, prec: int, normalize: bool = False
) -> List[List[int]]:
    """G[i][l] = coefficient of x^i in det^B (a + bx)^(k-2-l) (c + dx)^l, B = (w-k+2)/2.

    With ``normalize`` the determinant is divided by p first, which is the
    p^(-B) normalization of U at that place.
    """
    if k < 2 or (k - w) % 2:
        raise WeightError(f"weight {k} does not match w={w}")
    modulus = p**prec
    det = m.det
    if normalize:
        if det % p:
            raise DatasetError(f"U datum matrix {m!r} has a unit determinant")
        det //= p
    big_b = (w - k + 2) // 2
    if big_b < 0 and det % p == 0:
        raise DatasetError(f"determinant of {m!r} is not a unit, cannot twist by det^{big_b}")
    twist = pow(det, big_b, modulus)
    return [[x * twist % modulus for x in row] for row in sym_power_matrix(m, k, modulus)]


def sym_power_matrix(m: LocalMatrix, k: int, modulus: int) -> List[List[int]]:
    """S[i][l] = coefficient of x^i in (a + bx)^(k-2-l) (c + dx)^l."""
    size = k - 1
    out = [[0] * size for _ in range(size)]
    for col in range(size):
        poly = [1]
        for _ in range(k - 2 - col):
            poly = _poly_mul_trunc(poly, [m.a, m.b], size, modulus)
        for _ in range(col):
            poly = _poly_mul_trunc(poly, [m.c, m.d], size, modulus)
        for row, coeff in enumerate(poly):
            out[row][col] = coeff
    return out


def function_coefficients(m: LocalMatrix, p: int, moments: int, prec: int) -> List[List[int]]:
    """Integer part of the function action: coefficient of x^i in ((c + dx) / (a + bx))^j."""
    if m.a % p == 0:
        raise DatasetError(f"{m!r} has a non-unit upper-left entry at v")
    if m.c % p:
        raise DatasetError(f"{m!r} has c not divisible by p at v")
    modulus = p**prec
    a_inv = pow(m.a, -1, modulus)
    step = [m.c * a_inv % modulus, m.d * a_inv % modulus]
    if m.b % modulus:
        beta = m.b * a_inv % modulus
        geometric = [pow(-beta, n, modulus) for n in range(moments)]
        step = _poly_mul_trunc(step, geometric, moments, modulus)
    out = [[0] * moments for _ in range(moments)]
    poly = [1]
    for j in range(moments):
        for i, coeff in enumerate(poly):
            out[i][j] = coeff
        poly = _poly_mul_trunc(poly, step, moments, modulus)
    return out


@lru_cache(maxsize=32)
def _log_binomials(p: int, moments: int, terms: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """c[m][i] = coefficient of y^i in C(log(1 + y) / p, m)."""
    ell = [Fraction(0)] + [Fraction((-1) ** (n + 1), n * p) for n in range(1, moments)]
    row = [Fraction(1)] + [Fraction(0)] * (moments - 1)
    out = [tuple(row)]
    for m in range(1, terms):
        factor = list(ell)
        factor[0] -= m - 1
        nxt = [Fraction(0)] * moments
        for i, x in enumerate(row):
            if not x:
                continue
            for j in range(moments - i):
                if factor[j]:
                    nxt[i + j] += x * factor[j]
        row = [x / m for x in nxt]
        out.append(tuple(row))
    return tuple(out)


def one_unit_binomials(beta: int, p: int, moments: int, terms: int) -> List[List[Fraction]]:
    """T[m][i] = coefficient of x^i in C(log(1 + beta x) / p, m), exactly, for m < terms."""
    powers = [Fraction(beta) ** i for i in range(moments)]
    return [[c * powers[i] for i, c in enumerate(row)] for row in _log_binomials(p, moments, terms)]


def one_unit_digits(prec: int, s: int, moments: int, terms: int, p: int) -> int:
    """Digits of beta = b / a needed for the factor K(x) to be right modulo p^prec."""
    level = log_floor(max(terms - 1, 1), p)
    return prec + 1 + level + (moments - 1) * max(0, level + 1 - s)


def mahler_length(vz: Fraction, s: int, moments: int, p: int, target: int) -> int:
    """Least m0 with m v(z) + i (s - 1 - floor(log_p m)) >= target for every m >= m0 and i < moments.

    The left side bounds v_p of T[m][i] z^m when v_p(beta) = s, so the
    factor K(x) at X = z is the sum over m < m0.
    """
    if vz <= 0:
        raise WeightError("the weight factor needs v_p(z) > 0")
    slack = moments - 1
    last_bad = 0
    r = 0
    while True:
        start = p**r
        need = target + slack * max(0, r + 1 - s)
        if start * vz < need:
            first_good = -(-need // vz)
            last_bad = max(last_bad, min(p ** (r + 1), first_good) - 1)
        elif start * vz * (p - 1) >= slack:
            return last_bad + 1
        r += 1


def _residue(q: Fraction, p: int, modulus: int) -> Optional[int]:
    """q mod p^N for a p-integral rational, None otherwise."""
    if q.denominator % p == 0:
        return None
    return q.numerator * pow(q.denominator, -1, modulus) % modulus


def twist_table(ring: TruncatedRing, factor: Sequence[int], ints: Sequence[Sequence[int]]) -> List[List[int]]:
    """Ring table with [i][j] = sum_r factor[r] ints[i - r][j]."""
    out = []
    for i in range(len(ints)):
        row = []
        for j in range(len(ints[0])):
            total = 0
            for r in range(i + 1):
                x = ints[i - r][j]
                if x and factor[r]:
                    total += factor[r] * x
            row.append(ring.reduce(total) if total else 0)
        out.append(row)
    return out


class WeightContext:
    """The coefficient ring of a weight and its character as ring elements."""

    def __init__(self, weight: Weight, prec: int, xprec: int, max_terms: int = DEFAULT_MAX_DIM):
        self.weight = weight
        self.prec = prec
        if isinstance(weight, WeightComponent):
            self.component = weight
            self.ring = TruncatedRing(weight.field, prec, xprec, max_terms)
            self.digits = prec + v_p_factorial(xprec - 1, weight.p) + 3
        else:
            self.component = weight.component
            self.ring = TruncatedRing(weight.field, prec, 1, max_terms)
            if weight.is_locally_algebraic:
                self.digits = prec + 2
            else:
                self.digits = max(prec, power_digits(weight.z, prec)) + 3
        self.p = self.component.p

    def kappa(self, t1: int, t2: int) -> int:
        weight = self.weight
        if isinstance(weight, WeightComponent):
            series = eval_weight_char(weight, t1, t2, AsSeries(self.ring.xprec), self.prec)
            return self.ring.from_series(series)
        return self.ring.from_element(weight.evaluate(t1, t2, self.prec))

    def arguments(self, m: LocalMatrix, beta: int) -> Tuple[int, int]:
        """(a, u / a) with u = det / p^beta, as integers modulo p^digits."""
        p = self.p
        self._check_stored(m, self.digits)
        det = m.det
        if beta and det % p**beta:
            raise DatasetError(f"det of {m!r} is not divisible by p^{beta}")
        u = det // p**beta
        work = p**self.digits
        a = m.a % work
        return a, u * pow(m.a, -1, work) % work

    @staticmethod
    def _check_stored(m: LocalMatrix, needed: int) -> None:
        stored = m.precision()
        if stored is not None and stored < needed:
            logger.warning("coset matrix known to %d digits, %d needed", stored, needed)
            raise PrecisionError(
                f"coset matrix {m!r} is known to {stored} digits, {needed} needed",
                required=needed,
                available=stored,
            )

    def one_unit_factor(self, m: LocalMatrix, moments: int) -> Optional[List[int]]:
        """K_i, i < moments, with K(x) = kappa(1 + beta x, (1 + beta x)^-1) = sum K_i x^i.

        None when b is zero. Raises DatasetError when K is not integral on
        the moment basis, which happens when v_p(b) is too small for the
        weight.
        """
        p = self.p
        b_prec = m.precs[1]
        if m.b == 0 or (b_prec is not None and m.b % p**b_prec == 0):
            return None
        s = v_p_int(m.b, p)
        weight = self.weight
        if isinstance(weight, WeightPoint) and weight.is_locally_algebraic:
            return self._algebraic_factor(m, s, moments)
        if isinstance(weight, WeightComponent):
            terms = self.ring.xprec
        elif weight.z.is_zero():
            return None
        else:
            terms = mahler_length(padic_val(weight.z).value, s, moments, p, self.prec)
        needed = one_unit_digits(self.prec, s, moments, terms, p)
        if s >= needed:
            return None
        self._check_stored(m, needed)
        work = p**needed
        beta = m.b * pow(m.a, -1, work) % work
        table = one_unit_binomials(beta, p, moments, terms)
        if isinstance(weight, WeightComponent):
            return self._series_factor(m, table)
        return self._point_factor(m, table, weight.z)

    def _not_integral(self, m: LocalMatrix) -> DatasetError:
        return DatasetError(
            f"weight factor of {m!r} is not integral on the moment basis at {self.descriptor()}"
        )

    def _series_factor(self, m: LocalMatrix, table: List[List[Fraction]]) -> List[int]:
        ring = self.ring
        out = []
        for i in range(len(table[0])):
            column = []
            for row in table:
                value = _residue(row[i], self.p, ring.modulus)
                if value is None:
                    raise self._not_integral(m)
                column.append([value])
            out.append(ring.pack(column))
        return out

    def _point_factor(self, m: LocalMatrix, table: List[List[Fraction]], z: PadicElement) -> List[int]:
        base = qp(self.p)
        field = z.field
        work = self.prec + len(table[0])
        powers = [PadicElement.one(field, work)]
        for _ in range(1, len(table)):
            powers.append(powers[-1] * z)
        out = []
        for i in range(len(table[0])):
            total = PadicElement.zero(field, work)
            for row, zm in zip(table, powers):
                if row[i]:
                    total = total + embed(PadicElement.from_fraction(base, row[i], work), field) * zm
            if not total.is_integral():
                raise self._not_integral(m)
            out.append(self.ring.from_element(total.with_precision(self.prec)))
        return out

    def _algebraic_factor(self, m: LocalMatrix, s: int, moments: int) -> List[int]:
        weight = self.weight
        ratio = weight.eps[0] / weight.eps[1]
        if s < ratio.level:
            raise DatasetError(
                f"eps1/eps2 of level {ratio.level} is not constant on 1 + (b/a) pZ_p for {m!r}"
            )
        ring = self.ring
        modulus = ring.modulus
        beta = m.b * pow(m.a, -1, modulus) % modulus
        degree = weight.k - 2
        return [
            ring.scalar(math.comb(degree, i) * pow(beta, i, modulus)) if i <= degree else 0
            for i in range(moments)
        ]

    def descriptor(self) -> str:
        if isinstance(self.weight, WeightComponent):
            return repr(self.weight)
        return self.weight.descriptor


class UMatrix:
    """A Hecke matrix on (algebraic module x truncated distributions)^t.

    Index (class, algebraic index, moment degree) sits at
    class * (dim_alg * M) + alg * M + degree.
    """

    def __init__(
        self,
        ring: TruncatedRing,
        entries: List[List[int]],
        degrees: Sequence[int],
        name: str = "",
        weight: str = "",
        dataset_id: str = "none",
        moments: int = 0,
        component: Optional[WeightComponent] = None,
        t_prime: int = 1,
    ):
        self.ring = ring
        self.entries = entries
        self.degrees = list(degrees)
        self.name = name
        self.weight = weight
        self.dataset_id = dataset_id
        self.moments = moments
        self.component = component
        self.t_prime = t_prime

    @property
    def size(self) -> int:
        return len(self.entries)

    def degree_blocks(self) -> Optional[List[List[int]]]:
        """Finest split into runs of moment degrees for which the matrix is block upper triangular.

        With b = 0 at v every degree is its own block. None when no split exists.
        """
        degrees = self.degrees
        levels = sorted(set(degrees))
        reach = {deg: deg for deg in levels}
        for r, row in enumerate(self.entries):
            dr = degrees[r]
            for c, x in enumerate(row):
                if x and degrees[c] < reach[dr]:
                    reach[dr] = degrees[c]
        block_of = {levels[0]: 0} if levels else {}
        starts = set()
        low = None
        for pos in range(len(levels) - 1, 0, -1):
            deg = levels[pos]
            low = reach[deg] if low is None else min(low, reach[deg])
            if low >= deg:
                starts.add(pos)
        if not starts:
            return None
        block = 0
        for pos in range(1, len(levels)):
            if pos in starts:
                block += 1
            block_of[levels[pos]] = block
        groups: Dict[int, List[int]] = {}
        for idx, deg in enumerate(degrees):
            groups.setdefault(block_of[deg], []).append(idx)
        return [groups[b] for b in sorted(groups)]

    def submatrix(self, indices: Sequence[int]) -> List[List[int]]:
        return [[self.entries[r][c] for c in indices] for r in indices]

    def row_valuation(self, r: int) -> ValQ:
        """Least normalized valuation in row r."""
        best: Optional[ValQ] = None
        for x in self.entries[r]:
            v = self.ring.normalized_valuation(x)
            if best is None or v < best:
                best = v
        return best if best is not None else ValQ.infinity()

    def compactness_violations(self) -> List[Tuple[int, int, ValQ]]:
        """Rows of degree j whose valuation (in uniformizer units) falls below j - floor(j/p)."""
        p = self.ring.p
        out = []
        for r, deg in enumerate(self.degrees):
            v = self.row_valuation(r)
            if v.exact and not v.is_infinite and v < ValQ(deg - deg // p):
                out.append((r, deg, v))
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "weight": self.weight,
            "dataset": self.dataset_id,
            "size": self.size,
            "moments": self.moments,
            "ring": repr(self.ring),
        }


HeckeMatrix = UMatrix


def _check_delta_v(gamma: LocalMatrix, p: int) -> int:
    """beta = v_p(det gamma) after checking the Iwahori-type shape at v."""
    if gamma.a % p == 0:
        raise DatasetError(f"{gamma!r}: a is not a unit")
    if gamma.c % p:
        raise DatasetError(f"{gamma!r}: c is not divisible by p")
    if gamma.det == 0:
        raise DatasetError(f"{gamma!r} is singular")
    return v_p_int(gamma.det, p)


def local_function_matrix(
    gamma: LocalMatrix,
    weight: Weight,
    moments: int,
    prec: int = 20,
    xprec: int = DEFAULT_XPREC,
    context: Optional[WeightContext] = None,
) -> Tuple[TruncatedRing, List[List[int]]]:
    """F[i][j] = coefficient of x^i in x^j . gamma, as ring elements."""
    ctx = context or WeightContext(weight, prec, xprec)
    beta = _check_delta_v(gamma, ctx.p)
    ring = ctx.ring
    kappa = ctx.kappa(*ctx.arguments(gamma, beta))
    ints = function_coefficients(gamma, ctx.p, moments, ring.prec)
    factor = ctx.one_unit_factor(gamma, moments)
    if factor is None:
        return ring, [[ring.scale(kappa, x) if x else 0 for x in row] for row in ints]
    return ring, twist_table(ring, [ring.mul(kappa, k) for k in factor], ints)


def _table_for(gamma: LocalMatrix, ring: TruncatedRing, weight: Weight, moments: int) -> List[List[int]]:
    table_ring, table = local_function_matrix(gamma, weight, moments, ring.prec, ring.xprec)
    if not table_ring.compatible(ring):
        raise ValueError(f"weight coefficients live in {table_ring!r}, not {ring!r}")
    return table


def act_function(gamma: LocalMatrix, f: FunctionTrunc, weight: Weight, moments: Optional[int] = None) -> FunctionTrunc:
    """f . gamma truncated at degree M."""
    moments = moments or f.moments
    ring = f.ring
    table = _table_for(gamma, ring, weight, moments)
    coeffs = list(f.coeffs[:moments]) + [0] * (moments - len(f.coeffs))
    return FunctionTrunc(ring, [ring.dot(table[i], coeffs) for i in range(moments)])


def act_distribution(gamma: LocalMatrix, mu: DistTrunc, weight: Weight) -> DistTrunc:
    """(mu . gamma)(f) = mu(f . gamma) on the moment basis."""
    ring = mu.ring
    moments = mu.moments
    table = _table_for(gamma, ring, weight, moments)
    return DistTrunc(ring, [ring.dot(mu.values, [table[i][j] for i in range(moments)]) for j in range(moments)])


def _item_contribution(
    ctx: WeightContext,
    item: HeckeItem,
    u_place: Optional[int],
    coeff_module: AlgebraicCoeffModule,
    integer_part: Callable[[LocalMatrix, int], List[List[int]]],
) -> Tuple[int, List[List[int]]]:
    gamma = item.matrices[0]
    beta = 1 if u_place == 0 else 0
    kappa = ctx.kappa(*ctx.arguments(gamma, beta))
    local = integer_part(gamma, beta)
    algebraic = coeff_module.item_matrix(item, u_place, ctx.ring.prec)
    factor = ctx.one_unit_factor(gamma, len(local))
    if factor is None:
        return kappa, kron(algebraic, local, ctx.ring.modulus)
    ring = ctx.ring
    twisted = twist_table(ring, [ring.mul(kappa, k) for k in factor], local)
    return ring.one, kron(algebraic, twisted)


def assemble_hecke_matrix(
    ds: CosetDataset,
    name: str,
    ctx: WeightContext,
    block: int,
    integer_part: Callable[[LocalMatrix, int], List[List[int]]],
    max_dim: int = DEFAULT_MAX_DIM,
    threads: int = 1,
) -> UMatrix:
    """Sum kappa_item * (algebraic x local) into block (i, sigma(i)) for every item."""
    datum = ds.datum(name)
    u_place = datum.u_place
    coeff_module = AlgebraicCoeffModule(ds.p, ds.k_list, ds.w)
    per_class = coeff_module.dimension * block
    size = ds.t * per_class
    if size > max_dim:
        raise DimensionError(f"matrix dimension {size} exceeds the cap {max_dim}")
    ring = ctx.ring

    def work(item: HeckeItem):
        return _item_contribution(ctx, item, u_place, coeff_module, integer_part)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            contributions = list(pool.map(work, datum.items))
    else:
        contributions = [work(item) for item in datum.items]

    raw = matrix_zero(size, size)
    for item, (kappa, local) in zip(datum.items, contributions):
        for i, target in enumerate(item.sigma):
            row0, col0 = i * per_class, target * per_class
            for r, row in enumerate(local):
                out = raw[row0 + r]
                for c, x in enumerate(row):
                    if x:
                        out[col0 + c] += kappa * x
    entries = [[ring.reduce(x) if x else 0 for x in row] for row in raw]
    degrees = [idx % block for idx in range(size)]
    logger.debug("assembled %s: size %d over %r", name, size, ring)
    return UMatrix(
        ring, entries, degrees, name, ctx.descriptor(), dataset_digest(ds), block, ctx.component, ds.t_prime
    )


def _check_weight(ds: CosetDataset, weight: Weight) -> None:
    component = weight if isinstance(weight, WeightComponent) else weight.component
    if component.p != ds.p:
        raise WeightError(f"weight is for p={component.p}, dataset for p={ds.p}")
    if component.w != ds.w:
        raise WeightError(f"weight has w={component.w}, dataset has w={ds.w}")


def hecke_matrix_overconv(
    ds: CosetDataset,
    name: str,
    weight: Weight,
    moments: int = DEFAULT_MOMENTS,
    prec: int = 20,
    xprec: int = DEFAULT_XPREC,
    max_dim: int = DEFAULT_MAX_DIM,
    threads: int = 1,
) -> UMatrix:
    """Matrix of the named operator on the truncated overconvergent module.

    ``weight`` is a component (coefficients in Lambda truncated at X^xprec)
    or a point (coefficients in the field of that point).
    """
    _check_weight(ds, weight)
    if moments < 1:
        raise DimensionError("at least one moment is needed")
    ctx = WeightContext(weight, prec, xprec, max_dim)

    def integer_part(gamma: LocalMatrix, beta: int) -> List[List[int]]:
        return function_coefficients(gamma, ds.p, moments, prec)

    return assemble_hecke_matrix(ds, name, ctx, moments, integer_part, max_dim, threads)


def u_v_matrix(
    ds: CosetDataset,
    weight: Weight,
    moments: int = DEFAULT_MOMENTS,
    prec: int = 20,
    xprec: int = DEFAULT_XPREC,
    max_dim: int = DEFAULT_MAX_DIM,
    threads: int = 1,
) -> UMatrix:
    return hecke_matrix_overconv(ds, "Uv", weight, moments, prec, xprec, max_dim, threads)


def specialize_matrix(a: UMatrix, z: PadicElement) -> UMatrix:
    """Substitute X = z in every entry; precision drops to min(N, Mx * v_p(z))."""
    ring = a.ring
    vz = padic_val(z)
    prec = ring.prec
    if not z.is_zero():
        prec = int(min(Fraction(ring.prec), vz.value * ring.xprec))
    if prec < 1:
        raise PrecisionError(
            f"X-truncation {ring.xprec} leaves no precision at v_p(z) = {vz}",
            required=1,
            available=prec,
        )
    target = TruncatedRing(z.field, prec, 1, ring.max_terms)
    entries = [
        [target.from_element(ring.specialize_element(x, z)) if x else 0 for x in row] for row in a.entries
    ]
    return UMatrix(
        target, entries, a.degrees, a.name, f"{a.weight} at v(z)={vz}", a.dataset_id, a.moments, a.component, a.t_prime
    )


def classicality_projection(
    k: int,
    w: int,
    eps: Optional[Tuple[FiniteCharacter, FiniteCharacter]],
    moments: int,
    p: Optional[int] = None,
) -> List[List[int]]:
    """mu -> (mu(x^i))_{i <= k-2} as an M x (k-1) selection matrix (row-vector convention)."""
    make_locally_algebraic(k, w, eps, p)
    if moments < k - 1:
        raise DimensionError(f"{moments} moments cannot carry weight {k} (need {k - 1})")
    return [[1 if i == l else 0 for l in range(k - 1)] for i in range(moments)]


def classical_indices(a: UMatrix, k: int) -> List[int]:
    """Indices of the overconvergent basis that survive the projection, in classical order."""
    return [idx for idx, deg in enumerate(a.degrees) if deg < k - 1]


class IntertwiningReport:
    def __init__(self, ok: bool, mismatches: List[Tuple[int, int]]):
        self.ok = ok
        self.mismatches = mismatches

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "mismatches": [list(m) for m in self.mismatches[:20]]}


def check_intertwining(overconv: UMatrix, classical: UMatrix, k: int) -> IntertwiningReport:
    """Check U P = P U_classical for the moment projection P."""
    if not overconv.ring.compatible(classical.ring):
        raise ValueError("matrices live over different rings")
    keep = classical_indices(overconv, k)
    if len(keep) != classical.size:
        raise DimensionError(f"projection has rank {len(keep)}, classical space has dimension {classical.size}")
    position = {idx: n for n, idx in enumerate(keep)}
    mismatches = []
    for r in range(overconv.size):
        row = overconv.entries[r]
        for n, c in enumerate(keep):
            expected = classical.entries[position[r]][n] if r in position else 0
            if row[c] != expected:
                mismatches.append((r, c))
    if mismatches:
        logger.warning("intertwining fails at %d entries", len(mismatches))
    return IntertwiningReport(not mismatches, mismatches)
