"""Fredholm series, the lambda lower bound, Newton polygons and the halo report.

Characteristic series are computed without division (Berkowitz), degree
block by degree block when the operator is block triangular for the moment
grading. Every check in this module is three-state: it passes, it is
violated, or the tracked precision cannot decide it.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .distribution_module import DimensionError, UMatrix
from .padic_arith import (
    DEFAULT_PREC,
    PadicElement,
    PrecisionError,
    ValQ,
    cyclotomic_field,
    padic_val,
    phi_prime_power,
    radical_field,
)
from .truncated_ring import TruncatedRing
from .weight_space import (
    AnnulusError,
    FiniteCharacter,
    WeightComponent,
    WeightError,
    WeightPoint,
    ladder_weight,
    z_coordinate,
)

logger = logging.getLogger(__name__)

PASS = "pass"
VIOLATION = "violation"
UNRESOLVED = "unresolved"

UNIT = "unit"
NON_UNIT = "non-unit"
UNKNOWN = "unknown"

PRECISION_HEADROOM = 4


class HaloRangeError(ValueError):
    """The series is too short for the requested range of weights."""


# lambda


def lambda_lower_bound(t_prime: int, n_list: Iterable[int], p: int) -> List[int]:
    """lambda(n) for each requested n: lambda(0) = 0, lambda(i+1) = lambda(i) + [i/t'] - [i/(p t')]."""
    if t_prime < 1:
        raise ValueError("t' must be at least 1")
    n_list = list(n_list)
    if not n_list:
        return []
    if min(n_list) < 0:
        raise ValueError("n must be non-negative")
    table = lambda_table(t_prime, max(n_list), p)
    return [table[n] for n in n_list]


def lambda_table(t_prime: int, n_max: int, p: int) -> List[int]:
    out = [0]
    for i in range(n_max):
        out.append(out[-1] + i // t_prime - i // (p * t_prime))
    return out


def touch_index(k: int, c: int, t_prime: int, p: int) -> int:
    """n_k = (k-1) p^(c+1) t'."""
    return (k - 1) * p ** (c + 1) * t_prime


# characteristic series


def berkowitz_series(ring: TruncatedRing, matrix: Sequence[Sequence[int]], n_max: int) -> List[int]:
    """Coefficients c_0..c_n_max of det(1 - T A), division free."""
    size = len(matrix)
    top_degree = min(n_max, size)
    if size == 0:
        return [ring.one] + [0] * n_max
    poly = [ring.one, ring.neg(matrix[size - 1][size - 1])]
    for r in range(size - 2, -1, -1):
        width = size - r
        top = min(n_max, width)
        row = list(matrix[r][r + 1:])
        col = [matrix[i][r] for i in range(r + 1, size)]
        sub = [list(matrix[i][r + 1:]) for i in range(r + 1, size)]
        tvals = [ring.one, matrix[r][r]]
        vec = col
        for _ in range(2, top + 1):
            tvals.append(ring.dot(row, vec))
            if len(tvals) <= top:
                vec = [ring.dot(sub_row, vec) for sub_row in sub]
        new = []
        for i in range(top + 1):
            current = poly[i] if i < len(poly) else 0
            correction = 0
            for j in range(1, i + 1):
                if j < len(tvals) and i - j < len(poly):
                    a, b = tvals[j], poly[i - j]
                    if a and b:
                        correction += a * b
            correction = ring.reduce(correction) if correction else 0
            new.append(ring.sub(current, correction) if correction else current)
        poly = new
    poly = poly[: top_degree + 1]
    return poly + [0] * (n_max + 1 - len(poly))


def series_product(ring: TruncatedRing, a: Sequence[int], b: Sequence[int], n_max: int) -> List[int]:
    out = []
    for n in range(n_max + 1):
        total = 0
        for i in range(n + 1):
            if i < len(a) and n - i < len(b) and a[i] and b[n - i]:
                total += a[i] * b[n - i]
        out.append(ring.reduce(total) if total else 0)
    return out


class LambdaSeries:
    """sum_n c_n(X) T^n with c_n in O_E[X]/(p^N, X^Mx), n <= n_max."""

    def __init__(
        self,
        ring: TruncatedRing,
        coeffs: Sequence[int],
        t_prime: int,
        component: Optional[WeightComponent] = None,
        w: Optional[int] = None,
    ):
        if not coeffs or coeffs[0] != ring.one:
            raise ValueError("a Fredholm series starts with c_0 = 1")
        self.ring = ring
        self.coeffs = list(coeffs)
        self.t_prime = t_prime
        self.component = component
        self.w = component.w if component is not None else w
        self._lambda = lambda_table(t_prime, self.n_max, ring.p)

    @classmethod
    def from_terms(
        cls,
        p: int,
        c: int,
        t_prime: int,
        terms: Dict[int, Dict[int, Union[int, Sequence[int]]]],
        n_max: int,
        prec: int = DEFAULT_PREC,
        xprec: int = 12,
        w: int = 0,
        component: Optional[WeightComponent] = None,
    ) -> "LambdaSeries":
        """A series built from {n: {m: b_{n,m}}}; b is an integer or a pi-basis list."""
        ring = TruncatedRing(cyclotomic_field(p, c), prec, xprec)
        coeffs = [ring.one]
        for n in range(1, n_max + 1):
            table = [[0] for _ in range(xprec)]
            for m, b in terms.get(n, {}).items():
                if m >= xprec:
                    raise ValueError(f"term X^{m} is beyond the X-truncation {xprec}")
                table[m] = [b] if isinstance(b, int) else list(b)
            coeffs.append(ring.pack(table))
        return cls(ring, coeffs, t_prime, component=component, w=w)

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    @property
    def c(self) -> int:
        field = self.ring.field
        return field.level if field.kind == "cyclotomic" else 0

    @property
    def varpi_valuation(self) -> Fraction:
        return Fraction(1, self.ring.e)

    def lam(self, n: int) -> int:
        return self._lambda[n]

    def coefficient(self, n: int, m: int) -> PadicElement:
        return self.ring.coefficient(self.coeffs[n], m)

    def unit_flag(self, n: int) -> str:
        """Whether b_{n, lambda(n)} is a unit of O_E."""
        m = self.lam(n)
        if m >= self.ring.xprec:
            return UNKNOWN
        row = self.ring.unpack(self.coeffs[n])[m]
        v = self.ring.pi_valuation(row)
        return UNIT if v == 0 else NON_UNIT

    def unit_flags(self) -> List[str]:
        return [self.unit_flag(n) for n in range(self.n_max + 1)]

    def normalized_valuation(self, n: int) -> ValQ:
        return self.ring.normalized_valuation(self.coeffs[n])

    def valuations(self) -> List[ValQ]:
        """v_p(c_n) over a specialized ring, normalized valuations over Lambda."""
        if self.ring.xprec == 1:
            return [self.ring.valuation(x) for x in self.coeffs]
        return [self.ring.normalized_valuation(x) for x in self.coeffs]

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for n, x in enumerate(self.coeffs):
            for m, row in enumerate(self.ring.unpack(x)):
                if any(row):
                    out.append({"n": n, "m": m, "coeffs": " ".join(str(v) for v in row)})
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ring": repr(self.ring),
            "n_max": self.n_max,
            "t_prime": self.t_prime,
            "c": self.c,
            "lambda": list(self._lambda),
            "unit_flags": self.unit_flags() if self.ring.xprec > 1 else None,
        }


def fredholm_series(
    a: UMatrix,
    n_max: int,
    component: Optional[WeightComponent] = None,
    t_prime: Optional[int] = None,
    threads: int = 1,
    use_blocks: bool = True,
) -> LambdaSeries:
    """det(1 - T A) up to T^n_max."""
    if n_max > a.size:
        raise DimensionError(f"n_max={n_max} exceeds the matrix dimension {a.size}")
    ring = a.ring
    blocks = a.degree_blocks() if use_blocks else None
    if blocks is None:
        logger.debug("Berkowitz on the full %d x %d matrix", a.size, a.size)
        coeffs = berkowitz_series(ring, a.entries, n_max)
    else:
        submatrices = [a.submatrix(idx) for idx in blocks]

        def block_series(sub):
            return berkowitz_series(ring, sub, min(n_max, len(sub)))

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(block_series, submatrices))
        else:
            parts = [block_series(sub) for sub in submatrices]
        coeffs = [ring.one] + [0] * n_max
        for part in parts:
            coeffs = series_product(ring, coeffs, part, n_max)
        logger.debug("Fredholm series from %d degree blocks, n_max=%d", len(blocks), n_max)
    return LambdaSeries(
        ring,
        coeffs,
        t_prime if t_prime is not None else getattr(a, "t_prime", 1),
        component=component if component is not None else getattr(a, "component", None),
    )


class BoundCheck:
    def __init__(self, n: int, lam: int, known: Optional[int], bound: int, status: str):
        self.n = n
        self.lam = lam
        self.known = known
        self.bound = bound
        self.status = status

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "lambda": self.lam, "known": self.known, "bound": self.bound, "status": self.status}


def fredholm_bound_check(series: LambdaSeries) -> List[BoundCheck]:
    """min_m(v_E(b_{n,m}) / v_p(varpi_E) + m) >= lambda(n) for every n."""
    out = []
    for n, x in enumerate(series.coeffs):
        lam = series.lam(n)
        known, bound = series.ring.valuation_parts(x)
        if known is not None and known < lam:
            status = VIOLATION
        elif bound >= lam:
            status = PASS
        else:
            status = UNRESOLVED
        out.append(BoundCheck(n, lam, known, bound, status))
    violations = [c.n for c in out if c.status == VIOLATION]
    if violations:
        logger.warning("Fredholm bound violated at n = %s", violations)
    return out


def check_halo_precision(series: LambdaSeries, n_needed: Optional[int] = None) -> None:
    """Refuse when N or Mx cannot resolve b_{n, lambda(n)} up to n_needed."""
    n = series.n_max if n_needed is None else n_needed
    lam = lambda_table(series.t_prime, n, series.p)[n]
    required = math.ceil(Fraction(lam, series.ring.e)) + PRECISION_HEADROOM
    if series.ring.prec < required:
        logger.warning("precision %d below the required %d", series.ring.prec, required)
        raise PrecisionError(
            f"need --prec >= {required} to resolve lambda({n}) = {lam}, have {series.ring.prec}",
            required=required,
            available=series.ring.prec,
        )
    if series.ring.xprec <= lam:
        logger.warning("X-truncation %d does not exceed lambda(%d) = %d", series.ring.xprec, n, lam)
        raise PrecisionError(
            f"need --xprec >= {lam + 1} to resolve lambda({n}) = {lam}, have {series.ring.xprec}",
            required=lam + 1,
            available=series.ring.xprec,
        )


# Newton polygons


class Segment:
    __slots__ = ("start", "end", "slope", "certified")

    def __init__(self, start: Tuple[int, Fraction], end: Tuple[int, Fraction], certified: bool):
        self.start = start
        self.end = end
        self.slope = (end[1] - start[1]) / (end[0] - start[0])
        self.certified = certified

    @property
    def length(self) -> int:
        return self.end[0] - self.start[0]

    def value_at(self, n: int) -> Fraction:
        return self.start[1] + self.slope * (n - self.start[0])


class NewtonPolygon:
    """Lower convex hull of the exactly known points (n, v_n)."""

    def __init__(self, points: Sequence[ValQ], vertices: List[Tuple[int, Fraction]], segments: List[Segment]):
        self.points = list(points)
        self.vertices = vertices
        self.segments = segments

    @property
    def length(self) -> int:
        return self.vertices[-1][0]

    def _segment_for(self, n: int) -> Optional[Segment]:
        for seg in self.segments:
            if seg.start[0] <= n <= seg.end[0]:
                return seg
        return None

    def value_at(self, n: int) -> Optional[Fraction]:
        if n == 0:
            return self.vertices[0][1]
        seg = self._segment_for(n)
        return seg.value_at(n) if seg else None

    def slope_at(self, n: int) -> Optional[Fraction]:
        """Slope of the unit step from n-1 to n."""
        seg = self._segment_for(n - 1) if n >= 1 else None
        if seg is None or n > seg.end[0]:
            seg = self._segment_for(n)
        if seg is None or not (seg.start[0] < n <= seg.end[0]):
            return None
        return seg.slope

    def step_certified(self, n: int) -> bool:
        for seg in self.segments:
            if seg.start[0] < n <= seg.end[0]:
                return seg.certified
        return False

    def is_vertex(self, n: int) -> bool:
        return any(v[0] == n for v in self.vertices)

    def on_polygon(self, n: int) -> bool:
        """The exact point at n lies on the hull (vertices and collinear points)."""
        v = self.points[n] if n < len(self.points) else None
        if v is None or not v.exact or v.is_infinite:
            return False
        value = self.value_at(n)
        return value is not None and value == v.value

    def point_certified(self, n: int) -> bool:
        """On the hull and on a certified segment."""
        if not self.on_polygon(n):
            return False
        if not self.segments:
            return True
        return any(seg.certified and seg.start[0] <= n <= seg.end[0] for seg in self.segments)

    def certified_points(self) -> List[int]:
        return [n for n in range(self.length + 1) if self.point_certified(n)]

    @property
    def certified(self) -> bool:
        return all(seg.certified for seg in self.segments)

    def slopes(self) -> List[Tuple[Fraction, int, bool]]:
        """(slope, multiplicity, certified) per segment."""
        return [(seg.slope, seg.length, seg.certified) for seg in self.segments]

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        previous = None
        for n, value in self.vertices:
            slope = None
            if previous is not None:
                slope = (value - previous[1]) / (n - previous[0])
            certified = self.point_certified(n) if self.segments else True
            out.append({"n": n, "value": value, "slope": slope, "certified": certified})
            previous = (n, value)
        return out


def _below_or_on(o: Tuple[int, Fraction], a: Tuple[int, Fraction], b: Tuple[int, Fraction]) -> bool:
    """a lies on or above the line o-b."""
    cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    return cross <= 0


def newton_polygon(
    valuations: Sequence[ValQ], lower_bounds: Optional[Sequence[Optional[Fraction]]] = None
) -> NewtonPolygon:
    """Lower hull of the exact points; inexact points only certify or decertify segments."""
    vals = list(valuations)
    if not vals or not (vals[0].exact and vals[0] == ValQ(0)):
        raise ValueError("the constant term must have valuation exactly 0")
    points = [(n, v.value) for n, v in enumerate(vals) if v.exact and not v.is_infinite]
    hull: List[Tuple[int, Fraction]] = []
    for pt in points:
        while len(hull) >= 2 and _below_or_on(hull[-2], hull[-1], pt):
            hull.pop()
        hull.append(pt)
    bounds: Dict[int, Fraction] = {}
    for n, v in enumerate(vals):
        if not v.exact:
            bound = v.value
            if lower_bounds is not None and n < len(lower_bounds) and lower_bounds[n] is not None:
                bound = max(bound, Fraction(lower_bounds[n]))
            bounds[n] = bound
    segments = []
    for start, end in zip(hull, hull[1:]):
        seg = Segment(start, end, True)
        seg.certified = all(bound >= seg.value_at(n) for n, bound in bounds.items())
        segments.append(seg)
    return NewtonPolygon(vals, hull, segments)


# specialization


class SpecializedCoefficient:
    def __init__(self, n: int, value: ValQ, floor: Fraction, strong_floor: Fraction, flag: str, status: str):
        self.n = n
        self.value = value
        self.floor = floor
        self.strong_floor = strong_floor
        self.flag = flag
        self.status = status

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "valuation": str(self.value),
            "floor": str(self.floor),
            "strong_floor": str(self.strong_floor),
            "unit_flag": self.flag,
            "status": self.status,
        }


class SpecializationResult:
    def __init__(self, z_valuation: Fraction, cap: Fraction, entries: List[SpecializedCoefficient]):
        self.z_valuation = z_valuation
        self.cap = cap
        self.entries = entries

    @property
    def valuations(self) -> List[ValQ]:
        return [e.value for e in self.entries]

    @property
    def violations(self) -> List[SpecializedCoefficient]:
        return [e for e in self.entries if e.status == VIOLATION]

    def structural_bounds(self) -> List[Fraction]:
        """Floors usable as lower bounds when certifying a polygon."""
        return [e.strong_floor if e.flag == NON_UNIT else e.floor for e in self.entries]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z_valuation": str(self.z_valuation),
            "cap": str(self.cap),
            "entries": [e.to_dict() for e in self.entries],
        }


def _judge(value: ValQ, floor: Fraction, strong: Fraction, flag: str) -> str:
    if value.is_infinite:
        return VIOLATION if flag == UNIT else PASS
    if value.exact:
        v = value.value
        if v < floor:
            return VIOLATION
        if flag == UNIT:
            return PASS if v == floor else VIOLATION
        if flag == NON_UNIT:
            return PASS if v >= strong else VIOLATION
        return UNRESOLVED if v == floor else PASS
    cap = value.value
    if flag == UNIT:
        return VIOLATION if cap > floor else UNRESOLVED
    if flag == NON_UNIT:
        return PASS if cap >= strong else UNRESOLVED
    return PASS if cap >= strong else UNRESOLVED


def specialize(series: LambdaSeries, z: PadicElement) -> SpecializationResult:
    """v_p(c_n(z)) with the lambda(n) v_p(z) floors and the equality-iff-unit law."""
    vz = padic_val(z)
    if not vz.exact or not (0 < vz.value < series.varpi_valuation):
        raise AnnulusError(f"v_p(z) = {vz} is outside (0, {series.varpi_valuation})")
    v = vz.value
    margin = min(v, series.varpi_valuation - v)
    ring = series.ring
    cap = min(Fraction(ring.prec), v * ring.xprec)
    entries = []
    for n, x in enumerate(series.coeffs):
        value = padic_val(ring.specialize_element(x, z))
        floor = series.lam(n) * v
        strong = floor + margin
        flag = series.unit_flag(n)
        entries.append(SpecializedCoefficient(n, value, floor, strong, flag, _judge(value, floor, strong, flag)))
    result = SpecializationResult(v, cap, entries)
    if result.violations:
        logger.warning("specialization floors violated at n = %s", [e.n for e in result.violations])
    logger.debug("specialized %d coefficients at v(z)=%s, cap %s", len(entries), v, cap)
    return result


# halo decomposition


class KWindow:
    """Unit flags around n_k and the vertices n_k^- <= n_k <= n_k^+."""

    def __init__(
        self,
        k: int,
        n_k: int,
        lam: int,
        flags: Dict[int, str],
        n_minus: Optional[int],
        n_plus: Optional[int],
        certain: bool,
    ):
        self.k = k
        self.n_k = n_k
        self.lam = lam
        self.flags = flags
        self.n_minus = n_minus
        self.n_plus = n_plus
        self.certain = certain

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "n_k": self.n_k,
            "lambda": self.lam,
            "n_minus": self.n_minus,
            "n_plus": self.n_plus,
            "certain": self.certain,
            "flags": {str(n): f for n, f in sorted(self.flags.items())},
        }


class HaloComponent:
    """A slope interval I with its rank; a closed point {a} when low == high."""

    def __init__(self, low: int, high: int, rank: Optional[int], start: Optional[int], end: Optional[int]):
        self.low = low
        self.high = high
        self.rank = rank
        self.start = start
        self.end = end

    @property
    def is_point(self) -> bool:
        return self.low == self.high

    @property
    def label(self) -> str:
        return f"{{{self.low}}}" if self.is_point else f"({self.low},{self.high})"

    def contains(self, x: Fraction) -> bool:
        if self.is_point:
            return x == self.low
        return self.low < x < self.high

    def to_dict(self) -> Dict[str, Any]:
        return {"interval": self.label, "rank": self.rank, "start": self.start, "end": self.end}


class HaloZCheck:
    """Certifications of the report at one sampled z."""

    def __init__(self, z_valuation: Fraction):
        self.z_valuation = z_valuation
        self.vertex_checks: Dict[int, str] = {}
        self.window_status = PASS
        self.window_failures: List[int] = []
        self.certified_points: List[int] = []
        self.specialization_violations: List[int] = []

    @property
    def ok(self) -> bool:
        return (
            all(s == PASS for s in self.vertex_checks.values())
            and self.window_status == PASS
            and not self.specialization_violations
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z_valuation": str(self.z_valuation),
            "vertex_checks": {str(k): s for k, s in self.vertex_checks.items()},
            "window_status": self.window_status,
            "window_failures": self.window_failures,
            "certified_points": self.certified_points,
            "specialization_violations": self.specialization_violations,
        }


class HaloReport:
    def __init__(
        self,
        c: int,
        s0: int,
        t_prime: int,
        windows: List[KWindow],
        components: List[HaloComponent],
        z_checks: List[HaloZCheck],
        persistence: str,
    ):
        self.c = c
        self.s0 = s0
        self.t_prime = t_prime
        self.windows = windows
        self.components = components
        self.z_checks = z_checks
        self.persistence = persistence

    @property
    def ok(self) -> bool:
        return self.persistence == PASS and all(z.ok for z in self.z_checks)

    def window(self, k: int) -> KWindow:
        for w in self.windows:
            if w.k == k:
                return w
        raise KeyError(k)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": self.c,
            "s0": self.s0,
            "t_prime": self.t_prime,
            "windows": [w.to_dict() for w in self.windows],
            "components": [c.to_dict() for c in self.components],
            "z_checks": [z.to_dict() for z in self.z_checks],
            "persistence": self.persistence,
            "ok": self.ok,
        }


def _scan_units(flags: Dict[int, str], indices: Iterable[int], pick_max: bool) -> Tuple[Optional[int], bool]:
    """First unit index scanning from the chosen end; certain if no unknown flag came first."""
    order = sorted(indices, reverse=pick_max)
    certain = True
    for n in order:
        if flags[n] == UNIT:
            return n, certain
        if flags[n] == UNKNOWN:
            certain = False
    return None, certain


def _parity_weights(k_range: Iterable[int], w: int) -> List[int]:
    ks = sorted(set(k_range))
    for k in ks:
        if k < 2 or (k - w) % 2:
            raise WeightError(f"weight k={k} does not match w={w}")
    return ks


def halo_report(series: LambdaSeries, k_range: Iterable[int], z_samples: Sequence[PadicElement]) -> HaloReport:
    """Windows around each n_k, the interval components with ranks, and per-z certification."""
    if series.w is None:
        raise WeightError("the series carries no w; its parity fixes s_0")
    w = series.w
    ks = _parity_weights(k_range, w)
    if not ks:
        raise HaloRangeError("empty range of weights")
    p, c, t = series.p, series.c, series.t_prime
    s0 = 1 if w % 2 == 0 else 2
    k_min = s0 + 1
    if ks[0] != k_min or any(b - a != 2 for a, b in zip(ks, ks[1:])):
        raise HaloRangeError(f"weights must run k = {k_min}, {k_min + 2}, ... without gaps")
    n_needed = touch_index(ks[-1], c, t, p) + t
    if series.n_max < n_needed:
        raise HaloRangeError(f"series stops at n={series.n_max}, k up to {ks[-1]} needs n={n_needed}")
    check_halo_precision(series, n_needed)
    flags = {n: series.unit_flag(n) for n in range(n_needed + 1)}

    zero_plus, zero_certain = _scan_units(flags, range(0, t + 1), pick_max=True)
    windows = []
    for k in ks:
        n_k = touch_index(k, c, t, p)
        n_minus, certain_minus = _scan_units(flags, range(n_k - t, n_k + 1), pick_max=False)
        n_plus, certain_plus = _scan_units(flags, range(n_k, n_k + t + 1), pick_max=True)
        window_flags = {n: flags[n] for n in range(n_k - t, n_k + t + 1)}
        windows.append(KWindow(k, n_k, series.lam(n_k), window_flags, n_minus, n_plus, certain_minus and certain_plus))

    def rank(a: Optional[int], b: Optional[int]) -> Optional[int]:
        return None if a is None or b is None else b - a

    components = [HaloComponent(0, 0, zero_plus, 0, zero_plus)]
    components.append(HaloComponent(0, s0, rank(zero_plus, windows[0].n_minus), zero_plus, windows[0].n_minus))
    for i, win in enumerate(windows):
        components.append(HaloComponent(win.k - 1, win.k - 1, rank(win.n_minus, win.n_plus), win.n_minus, win.n_plus))
        if i + 1 < len(windows):
            nxt = windows[i + 1]
            components.append(HaloComponent(win.k - 1, win.k + 1, rank(win.n_plus, nxt.n_minus), win.n_plus, nxt.n_minus))

    z_checks = []
    scale_base = phi_prime_power(p, c + 1)
    last_index = windows[-1].n_plus
    for z in z_samples:
        specialized = specialize(series, z)
        v = specialized.z_valuation
        polygon = newton_polygon(specialized.valuations, specialized.structural_bounds())
        check = HaloZCheck(v)
        check.specialization_violations = [e.n for e in specialized.violations]
        for win in windows:
            check.vertex_checks[win.k] = _check_touch(series, polygon, win, v, scale_base)
        check.window_status, check.window_failures = _check_windows(polygon, components, v * scale_base, last_index)
        limit = last_index if last_index is not None else n_needed
        check.certified_points = [n for n in polygon.certified_points() if n <= limit]
        z_checks.append(check)

    persistence = PASS
    point_sets = {tuple(z.certified_points) for z in z_checks}
    if len(point_sets) > 1:
        persistence = VIOLATION
    if any(not (win.certain and win.n_minus is not None and win.n_plus is not None) for win in windows):
        persistence = UNRESOLVED if persistence == PASS else persistence
    report = HaloReport(c, s0, t, windows, components, z_checks, persistence)
    logger.debug("halo report: %d windows, %d z samples, ok=%s", len(windows), len(z_checks), report.ok)
    return report


def _check_touch(series: LambdaSeries, polygon: NewtonPolygon, win: KWindow, v: Fraction, scale_base: int) -> str:
    if win.n_minus is None or win.n_plus is None:
        return UNRESOLVED
    for n in (win.n_minus, win.n_plus):
        if not polygon.point_certified(n):
            return UNRESOLVED if n > polygon.length else VIOLATION
        if polygon.value_at(n) != series.lam(n) * v:
            return VIOLATION
    if win.n_minus == win.n_plus:
        return PASS
    if any(win.n_minus < n < win.n_plus for n, _ in polygon.vertices):
        return VIOLATION
    expected = (win.k - 1) * scale_base * v
    for n in range(win.n_minus + 1, win.n_plus + 1):
        if polygon.slope_at(n) != expected:
            return VIOLATION
    return PASS


def _check_windows(
    polygon: NewtonPolygon, components: List[HaloComponent], scale: Fraction, last_index: Optional[int]
) -> Tuple[str, List[int]]:
    """Each unit-step slope, divided by phi(p^(c+1)) v_p(z), lies in the interval of its component."""
    status = PASS
    failures = []
    for comp in components:
        if comp.start is None or comp.end is None:
            status = UNRESOLVED if status == PASS else status
            continue
        for n in range(comp.start + 1, comp.end + 1):
            slope = polygon.slope_at(n)
            if slope is None or not polygon.step_certified(n):
                status = UNRESOLVED if status == PASS else status
                continue
            if not comp.contains(slope / scale):
                failures.append(n)
                status = VIOLATION
    return status, failures


# sampling and scans


def z_sample(p: int, kind: str, level: int, power: int = 1, prec: int = DEFAULT_PREC) -> PadicElement:
    """(zeta_{p^level} - 1)^power ("cyc") or (p^(1/level))^power ("rad")."""
    if power < 1:
        raise ValueError("power must be positive")
    if kind == "cyc":
        if level < 1:
            raise ValueError("cyclotomic level must be at least 1")
        field = cyclotomic_field(p, level)
    elif kind == "rad":
        if level < 2:
            raise ValueError("radical degree must be at least 2")
        field = radical_field(p, level)
    else:
        raise ValueError(f"unknown z kind {kind!r}")
    return PadicElement.uniformizer(field, prec) ** power


def default_z_samples(p: int, c: int, prec: int = DEFAULT_PREC) -> List[PadicElement]:
    """zeta_{p^(c+1)} - 1, zeta_{p^(c+2)} - 1 and one more point of the annulus."""
    samples = [z_sample(p, "cyc", c + 1, 1, prec), z_sample(p, "cyc", c + 2, 1, prec)]
    if c == 0:
        samples.append(z_sample(p, "rad", p + 1, 1, prec))
    else:
        samples.append(z_sample(p, "cyc", c + 2, 2, prec))
    return samples


def standard_component(p: int, c: int, w: int) -> WeightComponent:
    """A component whose eta~ has level c: trivial for c = 0, wild exponent 1 otherwise."""
    eta = FiniteCharacter(p, c + 1, 0, 1) if c > 0 else FiniteCharacter.trivial(p)
    return WeightComponent(p, w, eta, (w + eta.tame, 0))


class ScanEntry:
    def __init__(self, weight: WeightPoint, z_valuation: Fraction, slopes: List[Tuple[Fraction, int, bool]], below: bool):
        self.weight = weight
        self.z_valuation = z_valuation
        self.slopes = slopes
        self.below = below

    @property
    def slope_bound(self) -> Optional[Fraction]:
        certified = [s for s, _, ok in self.slopes if ok]
        return max(certified) if certified else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weight": self.weight.descriptor,
            "z_valuation": str(self.z_valuation),
            "slopes": [[str(s), m, ok] for s, m, ok in self.slopes],
            "slope_bound": None if self.slope_bound is None else str(self.slope_bound),
            "below": self.below,
        }


class ScanResult:
    def __init__(self, entries: List[ScanEntry], first: Optional[ScanEntry]):
        self.entries = entries
        self.first = first

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "first": None if self.first is None else self.first.weight.descriptor,
        }


def small_slope_scan(
    series: LambdaSeries,
    k: int,
    w: int,
    samples: Union[int, Sequence[WeightPoint]] = 3,
    prec: Optional[int] = None,
) -> ScanResult:
    """Locally algebraic weights of weight (k, w) with growing conductor, until every certified slope is below k-1."""
    if k < 2 or (k - w) % 2:
        raise WeightError(f"weight k={k} does not match w={w}")
    prec = prec or series.ring.prec
    if isinstance(samples, int):
        component = series.component or standard_component(series.p, series.c, w)
        if component.w != w:
            raise WeightError(f"series component has w={component.w}, asked for w={w}")
        weights = [ladder_weight(component, k, series.c + i) for i in range(samples)]
    else:
        weights = list(samples)
    entries = []
    first = None
    for wp in weights:
        z, vz = z_coordinate(wp, prec)
        if z.is_zero():
            raise AnnulusError(f"{wp.descriptor} sits at z = 0, outside the boundary annulus")
        specialized = specialize(series, z)
        polygon = newton_polygon(specialized.valuations, specialized.structural_bounds())
        slopes = polygon.slopes()
        certified = [s for s, _, ok in slopes if ok]
        below = bool(certified) and all(s < k - 1 for s in certified)
        entry = ScanEntry(wp, vz.value, slopes, below)
        entries.append(entry)
        if below and first is None:
            first = entry
            break
    if first is None:
        logger.warning("no scanned weight brought every certified slope below %d", k - 1)
    return ScanResult(entries, first)
