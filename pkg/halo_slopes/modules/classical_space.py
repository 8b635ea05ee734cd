"""Classical quaternionic forms of weight (k, w) and their U_v-slopes.

The classical space at K_1(p^n) is realised inside the same coset data as
M^t: each class carries Sym^(k-2) at v (tensored with the fixed algebraic
module at the other places), acted on by the *-action

    (P . gamma)(x) = eps1(a) eps2(u / a) u^B (a + bx)^(k-2) P((c + dx) / (a + bx)).

On the monomial basis this is the top-left (k-1) block of the overconvergent
action at the same weight, which is what classicality rests on.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from .coset_data import CosetDataset, DatasetError, LocalMatrix
from .distribution_module import (
    DEFAULT_MAX_DIM,
    DEFAULT_MOMENTS,
    UMatrix,
    WeightContext,
    assemble_hecke_matrix,
    hecke_matrix_overconv,
    sym_power_matrix,
)
from .fredholm_newton import berkowitz_series, newton_polygon
from .padic_arith import DEFAULT_PREC, ValQ, embed
from .weight_space import FiniteCharacter, WeightError, WeightPoint, make_locally_algebraic

logger = logging.getLogger(__name__)

CharacterPair = Tuple[FiniteCharacter, FiniteCharacter]


def classical_dimension(k: int, n: int, t: int, p: int) -> int:
    """(k-1) p^(n-1) t."""
    if k < 2:
        raise WeightError(f"k must be at least 2, got {k}")
    if n < 1:
        raise ValueError("level exponent n must be at least 1")
    return (k - 1) * p ** (n - 1) * t


class ClassicalSpace:
    """S_{k,w}(eps, K_1(p^n)) described by a coset dataset of level n."""

    def __init__(self, ds: CosetDataset, k: int, w: int, eps: Optional[CharacterPair] = None):
        if w != ds.w:
            raise WeightError(f"weight has w={w}, dataset has w={ds.w}")
        self.dataset = ds
        self.weight = make_locally_algebraic(k, w, eps, p=ds.p)
        self.k = k
        self.w = w
        self.eps = self.weight.eps
        p, n = ds.p, ds.level
        ratio = self.eps[0] / self.eps[1]
        if ratio.conductor > n:
            raise DatasetError(
                f"eps1/eps2 has conductor p^{ratio.conductor}, dataset level is only p^{n}"
            )
        scale = p ** (n - 1)
        if ds.t_prime % scale:
            raise DatasetError(f"t'={ds.t_prime} is not divisible by p^(n-1)={scale}")
        self.level = n
        self.t_base = ds.t_prime // scale
        self.dimension = classical_dimension(k, n, self.t_base, p)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "w": self.w,
            "eps": [self.eps[0].to_dict(), self.eps[1].to_dict()],
            "level": self.level,
            "t_base": self.t_base,
            "dimension": self.dimension,
        }


class ClassicalContext(WeightContext):
    """Character part eps1(a) eps2(u/a) u^B of the *-action."""

    def __init__(self, weight: WeightPoint, prec: int, max_terms: int = DEFAULT_MAX_DIM):
        super().__init__(weight, prec, 1, max_terms)
        self.big_b = weight.exponents[1]

    def kappa(self, t1: int, t2: int) -> int:
        wp = self.weight
        field = self.ring.field
        modulus = self.ring.modulus
        value = embed(wp.eps[0].evaluate(t1, self.prec), field) * embed(wp.eps[1].evaluate(t2, self.prec), field)
        return self.ring.scale(self.ring.from_element(value), pow(t1 * t2, self.big_b, modulus))

    def one_unit_factor(self, m: LocalMatrix, moments: int) -> None:
        """The symmetric power already carries (a + bx)^(k-2)."""
        return None


def classical_hecke_matrix(
    ds: CosetDataset,
    k: int,
    w: int,
    eps: Optional[CharacterPair] = None,
    name: str = "Uv",
    prec: int = DEFAULT_PREC,
    max_dim: int = DEFAULT_MAX_DIM,
    threads: int = 1,
) -> UMatrix:
    """Matrix of the named operator on the classical space (same index layout as M^t with M = k-1)."""
    space = ClassicalSpace(ds, k, w, eps)
    ctx = ClassicalContext(space.weight, prec, max_dim)
    modulus = ctx.ring.modulus

    def integer_part(gamma: LocalMatrix, beta: int) -> List[List[int]]:
        return sym_power_matrix(gamma, k, modulus)

    matrix = assemble_hecke_matrix(ds, name, ctx, k - 1, integer_part, max_dim, threads)
    logger.debug("classical %s at k=%d: dimension %d", name, k, matrix.size)
    return matrix


class SlopeMultiset:
    """U_v-slopes with multiplicity; inexact entries are lower bounds."""

    def __init__(self, slopes: Sequence[ValQ]):
        self.slopes = sorted(slopes)

    def __len__(self) -> int:
        return len(self.slopes)

    def __iter__(self) -> Iterator[ValQ]:
        return iter(self.slopes)

    def __getitem__(self, i: int) -> ValQ:
        return self.slopes[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SlopeMultiset):
            return NotImplemented
        return self.slopes == other.slopes

    @classmethod
    def of(cls, values: Sequence[Any]) -> "SlopeMultiset":
        return cls([v if isinstance(v, ValQ) else ValQ(Fraction(v)) for v in values])

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.slopes)

    def below(self, bound: int) -> List[ValQ]:
        """Slopes that are, or may be, below ``bound``."""
        return [s for s in self.slopes if not s.is_infinite and s.value < bound]

    def total(self) -> Optional[Fraction]:
        if not self.exact:
            return None
        return sum((s.value for s in self.slopes), Fraction(0))

    def to_dict(self) -> Dict[str, Any]:
        return {"count": len(self.slopes), "exact": self.exact, "slopes": [str(s) for s in self.slopes]}


def _block_slopes(matrix: UMatrix, indices: Sequence[int]) -> List[ValQ]:
    ring = matrix.ring
    sub = matrix.submatrix(indices)
    size = len(sub)
    series = berkowitz_series(ring, sub, size)
    polygon = newton_polygon([ring.valuation(x) for x in series])
    out: List[ValQ] = []
    floor = Fraction(0)
    for slope, mult, certified in polygon.slopes():
        if not certified:
            break
        out.extend([ValQ(slope)] * mult)
        floor = slope
    if len(out) < size:
        row_floor = min((ring.valuation(x) for row in sub for x in row), default=ValQ.infinity())
        if not row_floor.is_infinite:
            floor = max(floor, row_floor.value)
        out.extend([ValQ.at_least(floor)] * (size - len(out)))
    return out


def slope_multiset(matrix: UMatrix) -> SlopeMultiset:
    """Slopes of the Newton polygon of det(1 - T A), block by block when A is block triangular."""
    if matrix.ring.xprec != 1:
        raise ValueError("slopes need a matrix over a field, specialize first")
    blocks = matrix.degree_blocks() or [list(range(matrix.size))]
    slopes: List[ValQ] = []
    for indices in blocks:
        slopes.extend(_block_slopes(matrix, indices))
    return SlopeMultiset(slopes)


class DualityReport:
    """Pairing alpha_i(eps) + alpha_(N-1-i)(eps^-1) = k - 1."""

    def __init__(
        self,
        k: int,
        count: int,
        violations: List[int],
        unresolved: List[int],
        sum_ok: Optional[bool],
        first: Optional[int],
    ):
        self.k = k
        self.count = count
        self.violations = violations
        self.unresolved = unresolved
        self.sum_ok = sum_ok
        self.first_violation = first

    @property
    def ok(self) -> bool:
        return not self.violations and not self.unresolved and bool(self.sum_ok)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "count": self.count,
            "ok": self.ok,
            "first_violation": self.first_violation,
            "violations": self.violations,
            "unresolved": self.unresolved,
            "sum_ok": self.sum_ok,
        }


def al_duality_check(
    slopes_eps: SlopeMultiset, slopes_inv: SlopeMultiset, k: int, expected_count: Optional[int] = None
) -> DualityReport:
    """Check the Atkin-Lehner pairing of two classical slope lists.

    The first violation is the least i such that alpha_i(eps) or
    alpha_i(eps^-1) has no dual partner.
    """
    count = len(slopes_eps)
    if len(slopes_inv) != count:
        raise ValueError(f"slope lists have different lengths {count} and {len(slopes_inv)}")
    if expected_count is not None and count != expected_count:
        raise ValueError(f"expected {expected_count} slopes, got {count}")
    violations, unresolved = [], []
    for i in range(count):
        a, b = slopes_eps[i], slopes_inv[count - 1 - i]
        if not (a.exact and b.exact) or a.is_infinite or b.is_infinite:
            unresolved.append(i)
        elif a.value + b.value != k - 1:
            violations.append(i)
    first = min((min(i, count - 1 - i) for i in violations), default=None)
    sum_ok = None
    if slopes_eps.exact and slopes_inv.exact:
        sum_ok = slopes_eps.total() + slopes_inv.total() == (k - 1) * count
    report = DualityReport(k, count, violations, unresolved, sum_ok, first)
    if violations:
        logger.warning("Atkin-Lehner duality fails at %d positions, first %d", len(violations), first)
    return report


def slope_range_anomalies(slopes: SlopeMultiset, k: int) -> List[ValQ]:
    """Exact slopes outside [0, k-1]."""
    return [s for s in slopes if s.exact and not s.is_infinite and not (0 <= s.value <= k - 1)]


class ClassicalityComparison:
    def __init__(self, k: int, classical: List[ValQ], overconvergent: Dict[int, List[ValQ]]):
        self.k = k
        self.classical = classical
        self.overconvergent = overconvergent

    @property
    def resolved(self) -> bool:
        lists = [self.classical] + list(self.overconvergent.values())
        return all(s.exact for slopes in lists for s in slopes)

    @property
    def matches(self) -> Dict[int, bool]:
        return {m: slopes == self.classical for m, slopes in self.overconvergent.items()}

    @property
    def ok(self) -> bool:
        return self.resolved and all(self.matches.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "classical": [str(s) for s in self.classical],
            "overconvergent": {str(m): [str(s) for s in v] for m, v in self.overconvergent.items()},
            "matches": {str(m): ok for m, ok in self.matches.items()},
            "resolved": self.resolved,
            "ok": self.ok,
        }


def compare_classicality(
    ds: CosetDataset,
    k: int,
    w: int,
    eps: Optional[CharacterPair] = None,
    moments: int = DEFAULT_MOMENTS,
    prec: int = DEFAULT_PREC,
    step: int = 4,
    max_dim: int = DEFAULT_MAX_DIM,
    threads: int = 1,
) -> ClassicalityComparison:
    """Slopes below k-1 of the classical space against M^t at M and M + step."""
    classical = slope_multiset(classical_hecke_matrix(ds, k, w, eps, prec=prec, max_dim=max_dim, threads=threads))
    wp = make_locally_algebraic(k, w, eps, p=ds.p)
    overconvergent = {}
    for m in (moments, moments + step):
        matrix = hecke_matrix_overconv(ds, "Uv", wp, m, prec, 1, max_dim, threads)
        overconvergent[m] = slope_multiset(matrix).below(k - 1)
    result = ClassicalityComparison(k, classical.below(k - 1), overconvergent)
    if not result.ok:
        logger.warning("classicality comparison at k=%d did not match: %s", k, result.matches)
    return result
