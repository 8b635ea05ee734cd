"""Coset datasets: the combinatorial description of H^0(K, M) = M^t and its Hecke operators.

A dataset lists, for each Hecke operator, single-coset items. Each item maps
class i to class sigma(i) and carries one 2x2 matrix per place above p.
Place 0 is the distinguished place v.
"""

import hashlib
import logging
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .padic_arith import PadicElement, is_prime, qp, v_p_int

logger = logging.getLogger(__name__)

N_STORE = 20
# synthetic Iwahori units have b in p^B_VALUATION Z_p
B_VALUATION = 4

_U_NAME = re.compile(r"^Uv(\d*)$")


class DatasetError(ValueError):
    """Malformed dataset text or a failed membership condition."""


class LocalMatrix:
    """A 2x2 matrix over Z_p with integer entries known modulo p^prec (None: exact)."""

    __slots__ = ("a", "b", "c", "d", "precs")

    def __init__(self, a: int, b: int, c: int, d: int, precs: Optional[Sequence[Optional[int]]] = None):
        self.a, self.b, self.c, self.d = a, b, c, d
        self.precs = tuple(precs) if precs is not None else (None, None, None, None)

    @classmethod
    def identity(cls) -> "LocalMatrix":
        return cls(1, 0, 0, 1)

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def precision(self) -> Optional[int]:
        """Smallest stored precision among the entries, None when all are exact."""
        known = [q for q in self.precs if q is not None]
        return min(known) if known else None

    def det_valuation(self, p: int) -> Optional[int]:
        """v_p(det), or None when det vanishes at stored precision."""
        det = self.det
        prec = self.precision()
        if prec is not None:
            det %= p**prec
        if det == 0:
            return None
        return v_p_int(det, p)

    def __matmul__(self, other: "LocalMatrix") -> "LocalMatrix":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        known = [q for q in (self.precision(), other.precision()) if q is not None]
        prec = min(known) if known else None
        return LocalMatrix(a, b, c, d, (prec,) * 4 if prec is not None else None)

    def reduced(self, p: int, prec: int) -> "LocalMatrix":
        modulus = p**prec
        return LocalMatrix(*(x % modulus for x in self.entries), precs=self.precs)

    def as_padic(self, p: int, prec: int = N_STORE) -> List[PadicElement]:
        out = []
        for x, q in zip(self.entries, self.precs):
            out.append(PadicElement.from_int_absolute(qp(p), x, prec if q is None else min(q, prec)))
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalMatrix):
            return NotImplemented
        return self.entries == other.entries and self.precs == other.precs

    def __repr__(self) -> str:
        return f"LocalMatrix([[{self.a}, {self.b}], [{self.c}, {self.d}]])"

    def to_text(self) -> str:
        parts = []
        for x, q in zip(self.entries, self.precs):
            parts.append(str(x) if q is None else f"{x}@{q}")
        return " ".join(parts)


class HeckeItem:
    """One single coset: the class map sigma and a matrix per place above p."""

    __slots__ = ("sigma", "matrices")

    def __init__(self, sigma: Sequence[int], matrices: Sequence[LocalMatrix]):
        self.sigma = tuple(sigma)
        self.matrices = tuple(matrices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeItem):
            return NotImplemented
        return self.sigma == other.sigma and self.matrices == other.matrices

    def to_text(self) -> str:
        return " ".join(str(s) for s in self.sigma) + " | " + " | ".join(m.to_text() for m in self.matrices)


class HeckeDatum:
    """A named Hecke operator given by its single-coset items."""

    def __init__(self, name: str, items: Sequence[HeckeItem]):
        if not name or any(ch.isspace() for ch in name):
            raise DatasetError(f"invalid datum name {name!r}")
        self.name = name
        self.items = list(items)

    @property
    def u_place(self) -> Optional[int]:
        """Index of the place at which this is a U operator, None for data away from p."""
        m = _U_NAME.match(self.name)
        if not m:
            return None
        if m.group(1) == "":
            return 0
        j = int(m.group(1))
        if j < 2:
            raise DatasetError(f"datum {self.name}: U data at other places are named Uv2, Uv3, ...")
        return j - 1

    @property
    def is_u_v(self) -> bool:
        return self.name == "Uv"

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeDatum):
            return NotImplemented
        return self.name == other.name and self.items == other.items

    def __repr__(self) -> str:
        return f"HeckeDatum({self.name!r}, {len(self.items)} items)"


class CosetDataset:
    """Everything needed to assemble Hecke matrices on M^t."""

    def __init__(
        self,
        p: int,
        d: int,
        t: int,
        w: int,
        k_list: Sequence[int],
        data: Iterable[HeckeDatum],
        level: int = 1,
        provenance: str = "ingested",
    ):
        if p < 3 or not is_prime(p):
            raise DatasetError(f"p must be an odd prime, got {p}")
        if d < 1:
            raise DatasetError("d must be at least 1")
        if t < 1:
            raise DatasetError("t must be at least 1")
        if level < 1:
            raise DatasetError("level must be at least 1")
        k_list = tuple(int(k) for k in k_list)
        if len(k_list) != d - 1:
            raise DatasetError(f"k_list has {len(k_list)} entries, expected d-1 = {d - 1}")
        for k in k_list:
            if k < 2:
                raise DatasetError(f"fixed weight {k} is below 2")
            if (k - w) % 2:
                raise DatasetError(f"fixed weight {k} has the wrong parity for w={w}")
        if not (provenance == "ingested" or re.fullmatch(r"synthetic -?\d+", provenance)):
            raise DatasetError(f"unknown provenance {provenance!r}")
        self.p = p
        self.d = d
        self.t = t
        self.w = w
        self.k_list = k_list
        self.level = level
        self.provenance = provenance
        self.data: Dict[str, HeckeDatum] = {}
        for datum in data:
            if datum.name in self.data:
                raise DatasetError(f"duplicate datum {datum.name}")
            place = datum.u_place
            if place is not None and place >= d:
                raise DatasetError(f"datum {datum.name} refers to place {place + 1} but d={d}")
            if datum.is_u_v and len(datum.items) != p:
                raise DatasetError(f"datum Uv has {len(datum.items)} items, expected p={p}")
            self.data[datum.name] = datum

    @property
    def t_prime(self) -> int:
        """t * prod(k_{v'} - 1), the rank of M^t over the distribution module."""
        out = self.t
        for k in self.k_list:
            out *= k - 1
        return out

    @property
    def algebraic_dimension(self) -> int:
        out = 1
        for k in self.k_list:
            out *= k - 1
        return out

    @property
    def names(self) -> List[str]:
        return sorted(self.data)

    def datum(self, name: str) -> HeckeDatum:
        if name not in self.data:
            raise DatasetError(f"dataset has no datum named {name!r} (have: {', '.join(self.names)})")
        return self.data[name]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CosetDataset):
            return NotImplemented
        return serialize_dataset(self) == serialize_dataset(other)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "d": self.d,
            "t": self.t,
            "w": self.w,
            "k_list": list(self.k_list),
            "level": self.level,
            "provenance": self.provenance,
            "neatness": "assumed",
            "data": {name: len(self.data[name].items) for name in self.names},
        }


# text format


def serialize_dataset(ds: CosetDataset) -> bytes:
    """Canonical text form: fixed header order, data sorted by name."""
    lines = [
        f"p {ds.p}",
        f"d {ds.d}",
        f"t {ds.t}",
        f"w {ds.w}",
        "k_list" + "".join(f" {k}" for k in ds.k_list),
        f"level {ds.level}",
        f"provenance {ds.provenance}",
    ]
    for name in ds.names:
        datum = ds.data[name]
        lines.append(f"datum {name} {len(datum.items)}")
        lines.extend(item.to_text() for item in datum.items)
        lines.append("end")
    return ("\n".join(lines) + "\n").encode("ascii")


def dataset_digest(ds: Optional[CosetDataset]) -> str:
    """sha256 of the canonical form, "none" without a dataset."""
    if ds is None:
        return "none"
    return hashlib.sha256(serialize_dataset(ds)).hexdigest()


_HEADER_KEYS = ("p", "d", "t", "w", "k_list", "level", "provenance")
_REQUIRED_KEYS = ("p", "d", "t", "w", "k_list")


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise DatasetError(f"line {lineno}: expected an integer, got {token!r}") from None


def _parse_entry(token: str, lineno: int) -> Tuple[int, Optional[int]]:
    if "@" in token:
        value, prec = token.split("@", 1)
        q = _parse_int(prec, lineno)
        if q < 1:
            raise DatasetError(f"line {lineno}: entry precision must be positive")
        return _parse_int(value, lineno), q
    return _parse_int(token, lineno), None


def _parse_item(line: str, lineno: int, t: int, d: int) -> HeckeItem:
    fields = [f.split() for f in line.split("|")]
    if len(fields) != d + 1:
        raise DatasetError(f"line {lineno}: expected {d + 1} '|'-separated fields, got {len(fields)}")
    sigma = [_parse_int(tok, lineno) for tok in fields[0]]
    if len(sigma) != t:
        raise DatasetError(f"line {lineno}: class map has {len(sigma)} entries, expected t={t}")
    matrices = []
    for part in fields[1:]:
        if len(part) != 4:
            raise DatasetError(f"line {lineno}: a matrix needs 4 entries, got {len(part)}")
        parsed = [_parse_entry(tok, lineno) for tok in part]
        matrices.append(LocalMatrix(*(v for v, _ in parsed), precs=[q for _, q in parsed]))
    return HeckeItem(sigma, matrices)


def parse_dataset(data: Union[bytes, str], validate: bool = True) -> CosetDataset:
    """Read a dataset; any defect raises DatasetError.

    With ``validate=False`` only the grammar and the header constraints are
    enforced, so that membership failures can be reported item by item.
    """
    text = data.decode("ascii") if isinstance(data, bytes) else data
    header: Dict[str, Tuple[int, List[str]]] = {}
    blocks: List[HeckeDatum] = []
    lines = [(i + 1, raw.split("#", 1)[0].strip()) for i, raw in enumerate(text.splitlines())]
    lines = [(n, s) for n, s in lines if s]
    pos = 0
    while pos < len(lines) and not lines[pos][1].startswith("datum"):
        lineno, line = lines[pos]
        key, *rest = line.split()
        if key not in _HEADER_KEYS:
            raise DatasetError(f"line {lineno}: unknown header field {key!r}")
        if key in header:
            raise DatasetError(f"line {lineno}: duplicate header field {key!r}")
        header[key] = (lineno, rest)
        pos += 1
    missing = [k for k in _REQUIRED_KEYS if k not in header]
    if missing:
        raise DatasetError(f"missing header fields: {', '.join(missing)}")
    scalars = {}
    for key in ("p", "d", "t", "w", "level"):
        if key in header:
            lineno, rest = header[key]
            if len(rest) != 1:
                raise DatasetError(f"line {lineno}: header field {key} takes one integer")
            scalars[key] = _parse_int(rest[0], lineno)
    k_line, k_tokens = header["k_list"]
    k_list = [_parse_int(tok, k_line) for tok in k_tokens]
    provenance = " ".join(header.get("provenance", (0, ["ingested"]))[1])
    t, d = scalars["t"], scalars["d"]

    while pos < len(lines):
        lineno, line = lines[pos]
        parts = line.split()
        if len(parts) != 3 or parts[0] != "datum":
            raise DatasetError(f"line {lineno}: expected 'datum <name> <count>'")
        name, count = parts[1], _parse_int(parts[2], lineno)
        pos += 1
        items = []
        for _ in range(count):
            if pos >= len(lines) or lines[pos][1] == "end":
                raise DatasetError(f"line {lineno}: datum {name} ends before {count} items")
            items.append(_parse_item(lines[pos][1], lines[pos][0], t, d))
            pos += 1
        if pos >= len(lines) or lines[pos][1] != "end":
            raise DatasetError(f"line {lineno}: datum {name} is not closed by 'end'")
        pos += 1
        blocks.append(HeckeDatum(name, items))

    ds = CosetDataset(
        p=scalars["p"],
        d=d,
        t=t,
        w=scalars["w"],
        k_list=k_list,
        data=blocks,
        level=scalars.get("level", 1),
        provenance=provenance,
    )
    report = validate_dataset(ds) if validate else None
    if report is not None and not report.ok:
        first = report.failures[0]
        raise DatasetError(f"{first.describe()} ({len(report.failures)} failed checks)")
    logger.debug("parsed dataset with %d data, t=%d, d=%d", len(ds.data), ds.t, ds.d)
    return ds


# validation


class ItemCheck:
    """Outcome of one membership condition on one item."""

    def __init__(self, datum: str, item: int, place: Optional[int], condition: str, passed: bool, detail: str = ""):
        self.datum = datum
        self.item = item
        self.place = place
        self.condition = condition
        self.passed = passed
        self.detail = detail

    def describe(self) -> str:
        where = f"datum {self.datum} item {self.item}"
        if self.place is not None:
            where += f" place {self.place}"
        status = "ok" if self.passed else "FAILED"
        text = f"{where}: {self.condition} {status}"
        return f"{text} ({self.detail})" if self.detail else text

    def to_dict(self) -> Dict[str, Any]:
        return {
            "datum": self.datum,
            "item": self.item,
            "place": self.place,
            "condition": self.condition,
            "passed": self.passed,
            "detail": self.detail,
        }


class ValidationReport:
    def __init__(self, checks: List[ItemCheck]):
        self.checks = checks

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[ItemCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "checks": len(self.checks),
            "failures": [c.to_dict() for c in self.failures],
        }


def _det_check(m: LocalMatrix, p: int, expected: int) -> Tuple[bool, str]:
    v = m.det_valuation(p)
    if v is None:
        return False, "det vanishes at stored precision"
    if v != expected:
        return False, f"v_p(det) = {v}, expected {expected}"
    return True, ""


def validate_dataset(ds: CosetDataset) -> ValidationReport:
    """Check every item for class-map range, the Iwahori-type shape at v and determinant valuations."""
    p, t = ds.p, ds.t
    checks: List[ItemCheck] = []
    for name in ds.names:
        datum = ds.data[name]
        u_place = datum.u_place
        if datum.is_u_v:
            checks.append(
                ItemCheck(name, -1, None, "item count", len(datum.items) == p, f"{len(datum.items)} items, p={p}")
            )
        for idx, item in enumerate(datum.items):
            in_range = len(item.sigma) == t and all(0 <= s < t for s in item.sigma)
            checks.append(ItemCheck(name, idx, None, "class map", in_range, "" if in_range else f"sigma={item.sigma}"))
            if len(item.matrices) != ds.d:
                checks.append(
                    ItemCheck(name, idx, None, "place count", False, f"{len(item.matrices)} matrices, d={ds.d}")
                )
                continue
            for place, m in enumerate(item.matrices):
                if place == 0:
                    a_unit = m.a % p != 0
                    checks.append(ItemCheck(name, idx, 0, "a is a unit", a_unit, f"a={m.a}"))
                    c_ok = m.c % p == 0
                    checks.append(ItemCheck(name, idx, 0, "c = 0 mod p", c_ok, f"c={m.c}"))
                passed, detail = _det_check(m, p, 1 if u_place == place else 0)
                checks.append(ItemCheck(name, idx, place, "det valuation", passed, detail))
    return ValidationReport(checks)


# synthesis


def _random_zp(rng: np.random.Generator, p: int, unit: bool = False, digits: int = N_STORE) -> int:
    ds = [int(x) for x in rng.integers(0, p, size=digits)]
    if unit:
        ds[0] = int(rng.integers(1, p))
    value = 0
    for digit in reversed(ds):
        value = value * p + digit
    return value


def _random_iwahori(rng: np.random.Generator, p: int) -> LocalMatrix:
    """[[alpha, p^B_VALUATION beta], [p gamma, delta]] with alpha, delta units."""
    alpha = _random_zp(rng, p, unit=True)
    delta = _random_zp(rng, p, unit=True)
    gamma = _random_zp(rng, p)
    beta = _random_zp(rng, p, digits=N_STORE - B_VALUATION)
    return LocalMatrix(alpha, p**B_VALUATION * beta, p * gamma, delta)


def _random_gl2(rng: np.random.Generator, p: int) -> LocalMatrix:
    while True:
        m = LocalMatrix(*(_random_zp(rng, p) for _ in range(4)))
        if m.det % p:
            return m


def _aux_primes(p: int, count: int) -> List[int]:
    out = []
    ell = 2
    while len(out) < count:
        if ell != p and is_prime(ell):
            out.append(ell)
        ell += 1
    return out


def gen_synthetic(
    seed: int,
    p: int,
    d: int = 1,
    t: int = 1,
    k_list: Sequence[int] = (),
    w: int = 0,
    n_data: int = 0,
    perturb: bool = True,
    level: int = 1,
) -> CosetDataset:
    """A dataset drawn deterministically from ``seed``.

    U_v items are [[1, 0], [p i, p]] times a random Iwahori unit and carry a
    random class permutation. With ``perturb=False`` the units and the
    permutations are trivial.
    """
    if p < 3 or not is_prime(p):
        raise DatasetError(f"p must be an odd prime, got {p}")
    if n_data < 0:
        raise DatasetError("n_data must be non-negative")
    if len(k_list) != d - 1:
        raise DatasetError(f"k_list has {len(k_list)} entries, expected d-1 = {d - 1}")
    rng = np.random.default_rng(seed)

    def sigma() -> List[int]:
        return [int(s) for s in rng.permutation(t)] if perturb else list(range(t))

    def away(place_count: int, skip: int) -> List[LocalMatrix]:
        out = []
        for place in range(place_count):
            if place == skip:
                out.append(LocalMatrix.identity())
            elif place == 0:
                out.append(_random_iwahori(rng, p) if perturb else LocalMatrix.identity())
            else:
                out.append(_random_gl2(rng, p) if perturb else LocalMatrix.identity())
        return out

    data = []
    items = []
    for i in range(p):
        matrices = away(d, 0)
        base = LocalMatrix(1, 0, p * i, p)
        matrices[0] = base @ _random_iwahori(rng, p) if perturb else base
        items.append(HeckeItem(sigma(), [m.reduced(p, N_STORE) for m in matrices]))
    data.append(HeckeDatum("Uv", items))

    for place in range(1, d):
        items = []
        bases = [LocalMatrix(p, 0, 0, 1)] + [LocalMatrix(1, 0, i, p) for i in range(p)]
        for base in bases:
            matrices = away(d, place)
            matrices[place] = base @ _random_gl2(rng, p) if perturb else base
            items.append(HeckeItem(sigma(), [m.reduced(p, N_STORE) for m in matrices]))
        data.append(HeckeDatum(f"Uv{place + 1}", items))

    for ell in _aux_primes(p, n_data):
        items = []
        for _ in range(ell + 1):
            target = [int(s) for s in rng.integers(0, t, size=t)] if perturb else list(range(t))
            items.append(HeckeItem(target, [m.reduced(p, N_STORE) for m in away(d, -1)]))
        data.append(HeckeDatum(f"Tw{ell}", items))

    ds = CosetDataset(p, d, t, w, k_list, data, level=level, provenance=f"synthetic {seed}")
    logger.debug("generated synthetic dataset seed=%d p=%d d=%d t=%d (%d data)", seed, p, d, t, len(data))
    return ds
