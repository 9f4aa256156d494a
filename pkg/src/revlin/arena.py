"""Reversible memory: exact rational cells mutated only by invertible primitives.

Every primitive is a bijection on the arena contents, and each kind has a
syntactic inverse (``ADD*`` <-> ``SUB*``, ``SCALE`` <-> ``UNSCALE``,
``SWAP`` <-> ``SWAP``).  Cells start at zero and may only be released while
zero; releasing a nonzero cell raises :class:`GarbageLeak`.

The arena also meters what it executes (primitive count, live cells, peak
live cells, widest operand).  Metrics are observational: nothing in the
value semantics reads them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NewType

from .errors import (
    AliasViolation,
    BitWidthExceeded,
    DivideByZero,
    GarbageLeak,
    InvalidCell,
    NonInvertible,
)
from .rational import bit_size, format_rational

CellId = NewType("CellId", int)

ZERO = Fraction(0)
ONE = Fraction(1)


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    def flipped(self) -> Direction:
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


FORWARD = Direction.FORWARD
BACKWARD = Direction.BACKWARD


class Kind(enum.Enum):
    ADDCONST = "ADDCONST"
    SUBCONST = "SUBCONST"
    ADDSCALED = "ADDSCALED"
    SUBSCALED = "SUBSCALED"
    ADDMUL = "ADDMUL"
    SUBMUL = "SUBMUL"
    ADDDIV = "ADDDIV"
    SUBDIV = "SUBDIV"
    SCALE = "SCALE"
    UNSCALE = "UNSCALE"
    SWAP = "SWAP"


INVERSE_KIND = {
    Kind.ADDCONST: Kind.SUBCONST,
    Kind.SUBCONST: Kind.ADDCONST,
    Kind.ADDSCALED: Kind.SUBSCALED,
    Kind.SUBSCALED: Kind.ADDSCALED,
    Kind.ADDMUL: Kind.SUBMUL,
    Kind.SUBMUL: Kind.ADDMUL,
    Kind.ADDDIV: Kind.SUBDIV,
    Kind.SUBDIV: Kind.ADDDIV,
    Kind.SCALE: Kind.UNSCALE,
    Kind.UNSCALE: Kind.SCALE,
    Kind.SWAP: Kind.SWAP,
}

# kinds whose effect is dst += f(other cells); allowed in copy legs
ADDITIVE_KINDS = frozenset(
    {
        Kind.ADDCONST,
        Kind.SUBCONST,
        Kind.ADDSCALED,
        Kind.SUBSCALED,
        Kind.ADDMUL,
        Kind.SUBMUL,
        Kind.ADDDIV,
        Kind.SUBDIV,
    }
)

_CONST_KINDS = frozenset({Kind.ADDCONST, Kind.SUBCONST})
_SCALED_KINDS = frozenset({Kind.ADDSCALED, Kind.SUBSCALED})
_BINARY_KINDS = frozenset({Kind.ADDMUL, Kind.SUBMUL, Kind.ADDDIV, Kind.SUBDIV})
_SCALE_KINDS = frozenset({Kind.SCALE, Kind.UNSCALE})


@dataclass(frozen=True, slots=True)
class Primitive:
    """One invertible statement.

    Operand usage by kind:

    ==============  =====================  ======================
    kind            operands               forward effect
    ==============  =====================  ======================
    ADD/SUBCONST    dst, k                 dst += k / dst -= k
    ADD/SUBSCALED   dst, a (src), k        dst += k*a
    ADD/SUBMUL      dst, a, b              dst += a*b
    ADD/SUBDIV      dst, a, b              dst += a/b
    SCALE/UNSCALE   dst, a (src)           dst *= a / dst /= a
    SWAP            dst, a                 exchange
    ==============  =====================  ======================
    """

    kind: Kind
    dst: CellId
    a: CellId | None = None
    b: CellId | None = None
    k: Fraction | None = None

    def __post_init__(self) -> None:
        kind = self.kind
        if kind in _CONST_KINDS:
            if self.k is None:
                raise ValueError(f"{kind.value} needs a constant")
        elif kind in _SCALED_KINDS:
            if self.a is None or self.k is None:
                raise ValueError(f"{kind.value} needs a source cell and a constant")
        elif kind in _BINARY_KINDS:
            if self.a is None or self.b is None:
                raise ValueError(f"{kind.value} needs two source cells")
        elif self.a is None:
            raise ValueError(f"{kind.value} needs a second cell")
        if kind is not Kind.SWAP and (self.dst == self.a or self.dst == self.b):
            raise AliasViolation(f"{kind.value}: destination c{self.dst} aliases a source")

    def inverse(self) -> Primitive:
        return Primitive(INVERSE_KIND[self.kind], self.dst, self.a, self.b, self.k)

    def reads(self) -> tuple[CellId, ...]:
        return tuple(c for c in (self.a, self.b) if c is not None)

    def writes(self) -> tuple[CellId, ...]:
        if self.kind is Kind.SWAP:
            return (self.dst, self.a)  # type: ignore[return-value]
        return (self.dst,)

    def __str__(self) -> str:
        kind, d, a, b = self.kind, self.dst, self.a, self.b
        name = kind.value
        if kind in _CONST_KINDS:
            op = "+=" if kind is Kind.ADDCONST else "-="
            return f"{name} c{d} {op} {format_rational(self.k)}"
        if kind in _SCALED_KINDS:
            op = "+=" if kind is Kind.ADDSCALED else "-="
            return f"{name} c{d} {op} {format_rational(self.k)} * c{a}"
        if kind in (Kind.ADDMUL, Kind.SUBMUL):
            op = "+=" if kind is Kind.ADDMUL else "-="
            return f"{name} c{d} {op} c{a} * c{b}"
        if kind in (Kind.ADDDIV, Kind.SUBDIV):
            op = "+=" if kind is Kind.ADDDIV else "-="
            return f"{name} c{d} {op} c{a} / c{b}"
        if kind is Kind.SCALE:
            return f"{name} c{d} *= c{a}"
        if kind is Kind.UNSCALE:
            return f"{name} c{d} /= c{a}"
        return f"{name} c{d} <-> c{a}"


# constructors, mostly so builders read like the statements they emit
def add_const(dst: CellId, k: Fraction | int) -> Primitive:
    return Primitive(Kind.ADDCONST, dst, k=Fraction(k))


def sub_const(dst: CellId, k: Fraction | int) -> Primitive:
    return Primitive(Kind.SUBCONST, dst, k=Fraction(k))


def add_scaled(dst: CellId, src: CellId, k: Fraction | int = 1) -> Primitive:
    return Primitive(Kind.ADDSCALED, dst, src, k=Fraction(k))


def sub_scaled(dst: CellId, src: CellId, k: Fraction | int = 1) -> Primitive:
    return Primitive(Kind.SUBSCALED, dst, src, k=Fraction(k))


def add_mul(dst: CellId, a: CellId, b: CellId) -> Primitive:
    return Primitive(Kind.ADDMUL, dst, a, b)


def sub_mul(dst: CellId, a: CellId, b: CellId) -> Primitive:
    return Primitive(Kind.SUBMUL, dst, a, b)


def add_div(dst: CellId, a: CellId, b: CellId) -> Primitive:
    return Primitive(Kind.ADDDIV, dst, a, b)


def sub_div(dst: CellId, a: CellId, b: CellId) -> Primitive:
    return Primitive(Kind.SUBDIV, dst, a, b)


def scale(dst: CellId, src: CellId) -> Primitive:
    return Primitive(Kind.SCALE, dst, src)


def unscale(dst: CellId, src: CellId) -> Primitive:
    return Primitive(Kind.UNSCALE, dst, src)


def swap(a: CellId, b: CellId) -> Primitive:
    return Primitive(Kind.SWAP, a, b)


@dataclass
class ResourceReport:
    primitive_ops: int = 0
    peak_live_cells: int = 0
    persistent_cells: int = 0
    transient_peak: int = 0
    garbage_cells: int = 0
    max_bits: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "primitive_ops": self.primitive_ops,
            "peak_live_cells": self.peak_live_cells,
            "persistent_cells": self.persistent_cells,
            "transient_peak": self.transient_peak,
            "garbage_cells": self.garbage_cells,
            "max_bits": self.max_bits,
        }


class Arena:
    """Store of exact rational cells.

    ``max_bits_limit`` aborts execution (``BitWidthExceeded``) as soon as a
    written value needs more bits than allowed; ``None`` disables the guard.
    """

    def __init__(self, max_bits_limit: int | None = None) -> None:
        self._cells: dict[CellId, Fraction] = {}
        self._next_id = 0
        self.live_count = 0
        self.peak_live = 0
        self.op_count = 0
        self.max_bits = 0
        self.max_bits_limit = max_bits_limit
        # per-run watermarks, reset by the interpreter
        self.window_peak = 0
        self.window_bits = 0

    # -- allocation -----------------------------------------------------

    def reserve(self, n: int) -> list[CellId]:
        """Hand out ``n`` ids that are guaranteed never to collide with others.

        The ids are not live; a program scope allocates them when entered.
        """
        if n < 0:
            raise ValueError("cannot reserve a negative number of cells")
        start = self._next_id
        self._next_id += n
        return [CellId(i) for i in range(start, start + n)]

    def alloc(self, n: int) -> list[CellId]:
        ids = self.reserve(n)
        self.claim(ids)
        return ids

    def claim(self, ids: Iterable[CellId]) -> None:
        """Make reserved ids live, each holding zero."""
        cells = self._cells
        for c in ids:
            if c in cells:
                raise InvalidCell(f"cell c{c} is already live")
            if not 0 <= c < self._next_id:
                raise InvalidCell(f"cell c{c} was never reserved")
            cells[c] = ZERO
            self.live_count += 1
        if self.live_count > self.peak_live:
            self.peak_live = self.live_count
        if self.live_count > self.window_peak:
            self.window_peak = self.live_count

    def free(self, ids: Iterable[CellId]) -> None:
        ids = list(ids)
        cells = self._cells
        for c in ids:
            if c not in cells:
                raise InvalidCell(f"cell c{c} is not allocated")
        leaked = [c for c in ids if cells[c]]
        if leaked:
            shown = ", ".join(f"c{c}={format_rational(cells[c])}" for c in leaked[:5])
            raise GarbageLeak(f"{len(leaked)} nonzero cell(s) released: {shown}")
        for c in ids:
            del cells[c]
            self.live_count -= 1

    # -- observation ----------------------------------------------------

    def read(self, cell: CellId) -> Fraction:
        try:
            return self._cells[cell]
        except KeyError:
            raise InvalidCell(f"cell c{cell} is not allocated") from None

    def is_live(self, cell: CellId) -> bool:
        return cell in self._cells

    def snapshot(self) -> dict[CellId, Fraction]:
        return dict(self._cells)

    def live_cells(self) -> list[CellId]:
        return list(self._cells)

    # -- mutation -------------------------------------------------------

    def step(self, prim: Primitive, direction: Direction = FORWARD) -> None:
        kind = prim.kind if direction is FORWARD else INVERSE_KIND[prim.kind]
        cells = self._cells
        dst = prim.dst
        try:
            v = cells[dst]
            if kind is Kind.ADDMUL:
                new = v + cells[prim.a] * cells[prim.b]
            elif kind is Kind.SUBMUL:
                new = v - cells[prim.a] * cells[prim.b]
            elif kind is Kind.ADDSCALED:
                new = v + prim.k * cells[prim.a]
            elif kind is Kind.SUBSCALED:
                new = v - prim.k * cells[prim.a]
            elif kind is Kind.ADDCONST:
                new = v + prim.k
            elif kind is Kind.SUBCONST:
                new = v - prim.k
            elif kind is Kind.ADDDIV or kind is Kind.SUBDIV:
                den = cells[prim.b]
                if not den:
                    raise DivideByZero(f"{prim}: divisor c{prim.b} is zero")
                q = cells[prim.a] / den
                new = v + q if kind is Kind.ADDDIV else v - q
            elif kind is Kind.SCALE or kind is Kind.UNSCALE:
                m = cells[prim.a]
                if not m:
                    raise NonInvertible(f"{prim}: multiplier c{prim.a} is zero")
                new = v * m if kind is Kind.SCALE else v / m
            else:
                other = prim.a
                w = cells[other]
                cells[dst], cells[other] = w, v
                self.op_count += 1
                return
        except KeyError as exc:
            raise InvalidCell(f"{prim}: cell c{exc.args[0]} is not allocated") from None
        cells[dst] = new
        self.op_count += 1
        if new.denominator != 1 or new.numerator.bit_length() > self.window_bits:
            bits = bit_size(new)
            if bits > self.window_bits:
                self.window_bits = bits
                if bits > self.max_bits:
                    self.max_bits = bits
                if self.max_bits_limit is not None and bits > self.max_bits_limit:
                    raise BitWidthExceeded(
                        f"{prim}: value needs {bits} bits, limit is {self.max_bits_limit}"
                    )
