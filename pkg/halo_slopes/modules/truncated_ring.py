"""The coefficient ring O_E[X]/(p^N, X^Mx) with elements packed into integers.

An element is a table b[m][i] (X-degree m, pi-degree i) of residues mod p^N.
It is stored as one non-negative integer whose byte slots hold the table, so
a ring product is a single big-integer product followed by one reduction.
With ``xprec == 1`` the ring is the specialized ring O_F/p^N.
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .padic_arith import (
    PadicElement,
    RamifiedExtension,
    ValQ,
    eisenstein_reduce,
    embed,
    padic_val,
    v_p_int,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_TERMS = 4096


class TruncatedRing:
    """O_E[X]/(p^N, X^Mx) for a totally ramified E.

    Slots are sized so that a sum of up to ``max_terms`` products of reduced
    elements does not carry; callers that sum longer vectors must size the
    ring for them.
    """

    def __init__(
        self, field: RamifiedExtension, prec: int, xprec: int = 1, max_terms: int = DEFAULT_MAX_TERMS
    ):
        if prec < 1 or xprec < 1:
            raise ValueError("ring precisions must be positive")
        if max_terms < 1:
            raise ValueError("max_terms must be positive")
        self.max_terms = max_terms
        self.field = field
        self.p = field.p
        self.e = field.e
        self.prec = prec
        self.xprec = xprec
        self.modulus = field.p**prec
        self.stride = 2 * self.e - 1
        bits = 2 * self.modulus.bit_length() + (max_terms * xprec * self.e).bit_length() + 2
        self.slot_bytes = (bits + 7) // 8
        self.slot_bits = 8 * self.slot_bytes
        self.raw_slots = (2 * xprec - 1) * self.stride
        self.slots = [m * self.stride + i for m in range(xprec) for i in range(self.e)]
        self.pmask = self._pack_slots({slot: self.modulus for slot in self.slots})
        self.zero = 0
        self.one = 1

    def __repr__(self) -> str:
        return f"TruncatedRing({self.field!r}, N={self.prec}, Mx={self.xprec})"

    def compatible(self, other: "TruncatedRing") -> bool:
        return (
            self.field == other.field
            and self.prec == other.prec
            and self.xprec == other.xprec
            and self.slot_bytes == other.slot_bytes
        )

    # packing

    def _pack_slots(self, values) -> int:
        buf = bytearray(self.raw_slots * self.slot_bytes)
        sb = self.slot_bytes
        for slot, value in values.items():
            if value:
                buf[slot * sb:(slot + 1) * sb] = value.to_bytes(sb, "little")
        return int.from_bytes(buf, "little")

    def _raw_slots(self, raw: int) -> List[int]:
        sb = self.slot_bytes
        buf = raw.to_bytes(self.raw_slots * sb, "little")
        view = memoryview(buf)
        return [int.from_bytes(view[k * sb:(k + 1) * sb], "little") for k in range(self.raw_slots)]

    def reduce(self, raw: int) -> int:
        """Canonical form of a non-negative unreduced slot sum."""
        if raw == 0:
            return 0
        slots = self._raw_slots(raw)
        sb = self.slot_bytes
        modulus = self.modulus
        buf = bytearray(self.raw_slots * sb)
        for m in range(self.xprec):
            chunk = slots[m * self.stride:(m + 1) * self.stride]
            if not any(chunk):
                continue
            if self.e > 1:
                chunk = eisenstein_reduce(chunk, self.field.poly)
            base = m * self.stride
            for i in range(self.e):
                value = chunk[i] % modulus
                if value:
                    slot = base + i
                    buf[slot * sb:(slot + 1) * sb] = value.to_bytes(sb, "little")
        return int.from_bytes(buf, "little")

    def pack(self, table: Sequence[Sequence[int]]) -> int:
        """Element from a table b[m][i] of integers."""
        values = {}
        for m, row in enumerate(table[: self.xprec]):
            for i, c in enumerate(row[: self.e]):
                values[m * self.stride + i] = c % self.modulus
        return self._pack_slots(values)

    def unpack(self, x: int) -> List[List[int]]:
        """Table b[m][i] of a canonical element."""
        slots = self._raw_slots(x)
        return [[slots[m * self.stride + i] for i in range(self.e)] for m in range(self.xprec)]

    # arithmetic

    def add(self, a: int, b: int) -> int:
        return self.reduce(a + b)

    def sub(self, a: int, b: int) -> int:
        return self.reduce(a + self.pmask - b)

    def neg(self, a: int) -> int:
        if a == 0:
            return 0
        return self.reduce(self.pmask - a)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.reduce(a * b)

    def scale(self, a: int, c: int) -> int:
        """Multiply by an integer scalar."""
        c %= self.modulus
        if a == 0 or c == 0:
            return 0
        return self.reduce(a * c)

    def _check_terms(self, count: int) -> None:
        if count > self.max_terms:
            raise ValueError(f"a sum of {count} terms overflows a ring sized for {self.max_terms}")

    def dot(self, xs: Sequence[int], ys: Sequence[int]) -> int:
        self._check_terms(min(len(xs), len(ys)))
        total = 0
        for x, y in zip(xs, ys):
            if x and y:
                total += x * y
        return self.reduce(total) if total else 0

    def sum(self, xs: Sequence[int]) -> int:
        self._check_terms(len(xs))
        total = 0
        for x in xs:
            total += x
        return self.reduce(total) if total else 0

    def scalar(self, c: int) -> int:
        return self.pack([[c]])

    # conversion

    def from_element(self, x: PadicElement) -> int:
        """Constant element from an integral PadicElement of a subfield."""
        if x.field != self.field:
            x = embed(x, self.field)
        return self.pack([x.residue_coeffs(self.prec)])

    def from_series(self, coeffs: Sequence[PadicElement]) -> int:
        table = []
        for x in coeffs[: self.xprec]:
            if x.field != self.field:
                x = embed(x, self.field)
            table.append(x.residue_coeffs(self.prec))
        return self.pack(table)

    def coefficients(self, x: int) -> List[PadicElement]:
        """The X-coefficients b_m as elements of E known modulo p^N."""
        return [
            PadicElement(self.field, row, 0, self.e * self.prec) for row in self.unpack(x)
        ]

    def coefficient(self, x: int, m: int) -> PadicElement:
        return self.coefficients(x)[m]

    def pi_valuation(self, row: Sequence[int]) -> Optional[int]:
        """pi-adic valuation of one X-coefficient, None if it is 0 mod p^N."""
        best = None
        for i, c in enumerate(row):
            if c:
                v = self.e * v_p_int(c, self.p) + i
                if best is None or v < best:
                    best = v
        return best

    def valuation_parts(self, x: int) -> Tuple[Optional[int], int]:
        """(least v_pi(b_m) + m over the known nonzero b_m, lower bound for everything else)."""
        known = None
        bound = self.xprec if self.xprec > 1 else self.e * self.prec
        for m, row in enumerate(self.unpack(x)):
            v = self.pi_valuation(row)
            if v is None:
                bound = min(bound, self.e * self.prec + m)
            elif known is None or v + m < known:
                known = v + m
        return known, bound

    def normalized_valuation(self, x: int) -> ValQ:
        """min_m(v_pi(b_m) + m), exact or as a lower bound."""
        known, bound = self.valuation_parts(x)
        if known is not None and known < bound:
            return ValQ(known)
        return ValQ.at_least(bound)

    def valuation(self, x: int) -> ValQ:
        """v_p of a specialized element (xprec == 1)."""
        if self.xprec != 1:
            raise ValueError("valuation is only defined on specialized rings")
        v = self.pi_valuation(self.unpack(x)[0])
        if v is None:
            return ValQ.at_least(self.prec)
        return ValQ(Fraction(v, self.e))

    def specialize_element(self, x: int, z: PadicElement) -> PadicElement:
        """sum_m b_m z^m in the field of z; precision min(N, Mx * v_p(z))."""
        coeffs = self.coefficients(x)
        target = z.field
        if z.is_zero():
            return embed(coeffs[0], target)
        vz = padic_val(z)
        if self.xprec > 1 and vz.value <= 0:
            raise ValueError("specialization point must have positive valuation")
        total = embed(coeffs[-1], target)
        for b in reversed(coeffs[:-1]):
            total = total * z + embed(b, target)
        if self.xprec > 1:
            tail = vz.value * self.xprec
            total = total.with_precision(min(Fraction(self.prec), tail))
        return total.with_precision(self.prec)


def matrix_zero(rows: int, cols: int) -> List[List[int]]:
    return [[0] * cols for _ in range(rows)]


def ring_matrix_equal(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> bool:
    return len(a) == len(b) and all(list(r) == list(s) for r, s in zip(a, b))
