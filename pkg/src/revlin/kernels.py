"""Matrix handles and reversible matrix-multiplication builders."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .arena import Arena, CellId, add_const, add_mul, add_scaled
from .errors import OverlapError, ShapeMismatch
from .rational import parse_rational
from .rprog import Ccu, Prim, RevProgram, Scope, Seq

Matrix = list[list[Fraction]]


@dataclass(frozen=True)
class MatrixHandle:
    """``rows x cols`` grid of arena cells.

    ``cells`` is stored row-major in the *storage* orientation; when
    ``transposed`` is set the logical entry (i, j) lives at storage (j, i).
    """

    rows: int
    cols: int
    cells: tuple[CellId, ...]
    transposed: bool = False

    def __post_init__(self) -> None:
        if len(self.cells) != self.rows * self.cols:
            raise ShapeMismatch(f"{self.rows}x{self.cols} handle needs {self.rows * self.cols} cells")

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def entry(self, i: int, j: int) -> CellId:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) outside {self.rows}x{self.cols}")
        if self.transposed:
            return self.cells[j * self.rows + i]
        return self.cells[i * self.cols + j]

    def row(self, i: int) -> list[CellId]:
        return [self.entry(i, j) for j in range(self.cols)]

    def cell_set(self) -> frozenset[CellId]:
        return frozenset(self.cells)

    def read(self, arena: Arena) -> Matrix:
        return [[arena.read(self.entry(i, j)) for j in range(self.cols)] for i in range(self.rows)]


def transpose_view(m: MatrixHandle) -> MatrixHandle:
    """Same cells, rows and columns swapped; executes nothing."""
    return MatrixHandle(m.cols, m.rows, m.cells, not m.transposed)


def alloc_matrix(arena: Arena, rows: int, cols: int) -> MatrixHandle:
    return MatrixHandle(rows, cols, tuple(arena.alloc(rows * cols)))


def reserve_matrix(arena: Arena, rows: int, cols: int) -> MatrixHandle:
    """Handle over reserved (not yet live) cells, for use inside a Scope."""
    return MatrixHandle(rows, cols, tuple(arena.reserve(rows * cols)))


def load_matrix(arena: Arena, values: Sequence[Sequence[Fraction | int | str]]) -> MatrixHandle:
    """Allocate a matrix and fill it with ``ADDCONST`` steps."""
    rows = len(values)
    cols = len(values[0]) if rows else 0
    if any(len(r) != cols for r in values):
        raise ShapeMismatch("ragged matrix")
    h = alloc_matrix(arena, rows, cols)
    for i, row in enumerate(values):
        for j, v in enumerate(row):
            v = parse_rational(v)
            if v:
                arena.step(add_const(h.entry(i, j), v))
    return h


def unload_matrix(arena: Arena, h: MatrixHandle) -> None:
    """Zero a loaded matrix with the inverse steps and release it."""
    for c in h.cells:
        v = arena.read(c)
        if v:
            arena.step(add_const(c, v).inverse())
    arena.free(h.cells)


def build_matmul(
    arena: Arena, a: MatrixHandle, b: MatrixHandle, c: MatrixHandle, label: str | None = "matmul"
) -> RevProgram:
    """``C += A @ B`` with one temp cell, reused for every inner step.

    Each inner step multiplies into the temp, adds the temp into C, then
    multiplies back out, so the temp is zero between steps.  Forward cost
    is exactly ``3*m*n*p`` primitives.  ``arena`` is only used to reserve
    the temp id; the temp is live only while the program runs.
    """
    m, n = a.shape
    n2, p = b.shape
    if n != n2 or c.shape != (m, p):
        raise ShapeMismatch(f"cannot multiply {m}x{n} by {n2}x{p} into {c.rows}x{c.cols}")
    if c.cell_set() & (a.cell_set() | b.cell_set()):
        raise OverlapError("output matrix shares cells with an operand")
    (temp,) = arena.reserve(1)
    body = []
    for i in range(m):
        for j in range(p):
            cij = c.entry(i, j)
            for k in range(n):
                # built without ccu(): the overlap check above already covers it
                body.append(
                    Ccu(Prim(add_mul(temp, a.entry(i, k), b.entry(k, j))), Prim(add_scaled(cij, temp)))
                )
    return Scope((temp,), Seq(tuple(body)), label)


def build_add_scaled_identity(
    g: MatrixHandle, k: Fraction | int, skip: Sequence[int] = ()
) -> RevProgram:
    """Add ``k`` to each diagonal entry of square ``g`` (except indices in ``skip``)."""
    if g.rows != g.cols:
        raise ShapeMismatch(f"{g.rows}x{g.cols} is not square")
    k = Fraction(k)
    return Seq(
        tuple(Prim(add_const(g.entry(i, i), k)) for i in range(g.rows) if i not in skip),
        "add scaled identity",
    )


def matmul_values(a: Matrix, b: Matrix) -> Matrix:
    """Plain exact product, for checks."""
    n = len(b)
    if a and len(a[0]) != n:
        raise ShapeMismatch("inner dimensions differ")
    p = len(b[0]) if b else 0
    return [[sum((row[k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(p)] for row in a]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
