"""Reversible matrix inversion by row-pull Gauss-Jordan elimination.

Standard elimination pushes each pivot row into every row below it, so one
elimination step overwrites O(n^2) cells.  Here the loop order is turned
around: each row pulls the effect of every finished row onto itself in one
subroutine, which therefore only outputs that row (O(n) cells).  The
subroutine's intermediates (the working row and its multipliers) are
cleared by running it backward after its output row has been copied out.

Layout (all n x n, pairwise disjoint):

``A``    input, never written
``R``    rows of the unit upper-triangular echelon form (phase 1)
``P``    matching rows of the partially inverted identity (phase 1)
``Q``    rows of the inverse built bottom-up (phase 2)
``Inv``  final output

The whole two-phase computation is itself wrapped in compute-copy-uncompute
with ``Inv += Q`` as the copy, so after a forward run ``R``, ``P`` and ``Q``
are back to zero and only ``A`` and ``Inv`` hold data.

No row exchanges: a zero pivot raises ``SingularPivot``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

from .arena import Arena, CellId, add_const, add_div, add_scaled, sub_mul, unscale
from .errors import ShapeMismatch, SingularPivot
from .kernels import MatrixHandle, alloc_matrix, reserve_matrix
from .rprog import Prim, RevProgram, Seq, ccu, scope


@dataclass(frozen=True)
class InversionPlan:
    n: int
    A: MatrixHandle
    R: MatrixHandle
    P: MatrixHandle
    Q: MatrixHandle
    Inv: MatrixHandle
    scratch_row: tuple[CellId, ...]
    scratch_inv_row: tuple[CellId, ...]
    multipliers: tuple[CellId, ...]

    def buffers(self) -> list[MatrixHandle]:
        return [self.A, self.R, self.P, self.Q, self.Inv]

    def intermediates(self) -> list[MatrixHandle]:
        return [self.R, self.P, self.Q]


def make_plan(
    arena: Arena, a: MatrixHandle, inv: MatrixHandle | None = None, live: bool = True
) -> InversionPlan:
    """Set up the working buffers for inverting ``a``.

    ``R``, ``P``, ``Q`` are allocated when ``live``; otherwise they are only
    reserved and the caller must wrap the program in a scope over them.
    Scratch rows and multipliers are always just reserved: they become live
    inside each row subroutine.
    """
    if a.rows != a.cols:
        raise ShapeMismatch(f"cannot invert a {a.rows}x{a.cols} matrix")
    n = a.rows
    buffer = alloc_matrix if live else reserve_matrix
    if inv is None:
        inv = alloc_matrix(arena, n, n)
    elif inv.shape != (n, n):
        raise ShapeMismatch("output buffer has the wrong shape")
    return InversionPlan(
        n=n,
        A=a,
        R=buffer(arena, n, n),
        P=buffer(arena, n, n),
        Q=buffer(arena, n, n),
        Inv=inv,
        scratch_row=tuple(arena.reserve(n)),
        scratch_inv_row=tuple(arena.reserve(n)),
        multipliers=tuple(arena.reserve(n)),
    )


def build_row_reduce(plan: InversionPlan, i: int) -> RevProgram:
    """Phase-1 subroutine for row ``i`` (0-based): fills ``R[i]`` and ``P[i]``.

    Needs rows ``0..i-1`` of R and P already in place.
    """
    n, A, R, P = plan.n, plan.A, plan.R, plan.P
    s, t, m = plan.scratch_row, plan.scratch_inv_row, plan.multipliers

    load = [add_scaled(s[k], A.entry(i, k)) for k in range(n)]
    load.append(add_const(t[i], 1))

    eliminate: list = []
    for j in range(i):
        # R[j, j] is 1 once row j is normalized, so this is exact and cheap
        eliminate.append(add_div(m[j], s[j], R.entry(j, j)))
        for k in range(n):
            eliminate.append(sub_mul(s[k], m[j], R.entry(j, k)))
            eliminate.append(sub_mul(t[k], m[j], P.entry(j, k)))

    pivot = m[i]
    normalize = [add_scaled(pivot, s[i])]
    normalize += [unscale(s[k], pivot) for k in range(n)]
    normalize += [unscale(t[k], pivot) for k in range(n)]

    fault = partial(_zero_pivot, row=i)
    compute = Seq(
        (
            Seq(tuple(Prim(p) for p in load), "load"),
            Seq(tuple(Prim(p) for p in eliminate), "eliminate"),
            Seq(tuple(Prim(p) for p in normalize), f"normalize row {i}", fault),
        )
    )
    copy = Seq(
        tuple(Prim(add_scaled(R.entry(i, k), s[k])) for k in range(n))
        + tuple(Prim(add_scaled(P.entry(i, k), t[k])) for k in range(n))
    )
    return scope(s + t + m, ccu(compute, copy), f"reduce row {i}")


def build_back_substitute(plan: InversionPlan, i: int) -> RevProgram:
    """Phase-2 subroutine for row ``i``: fills ``Q[i]`` from ``P[i]`` and rows below.

    Needs phase 1 finished and rows ``i+1..n-1`` of Q in place.  The
    multipliers are the entries ``R[i, j]`` themselves, read in place.
    """
    n, R, P, Q = plan.n, plan.R, plan.P, plan.Q
    u = plan.scratch_inv_row
    compute = [add_scaled(u[k], P.entry(i, k)) for k in range(n)]
    for j in range(i + 1, n):
        for k in range(n):
            compute.append(sub_mul(u[k], R.entry(i, j), Q.entry(j, k)))
    copy = [add_scaled(Q.entry(i, k), u[k]) for k in range(n)]
    return scope(
        u,
        ccu(Seq(tuple(Prim(p) for p in compute)), Seq(tuple(Prim(p) for p in copy))),
        f"back-substitute row {i}",
    )


def build_phases(plan: InversionPlan) -> RevProgram:
    n = plan.n
    phase1 = Seq(tuple(build_row_reduce(plan, i) for i in range(n)), "phase 1")
    phase2 = Seq(tuple(build_back_substitute(plan, i) for i in reversed(range(n))), "phase 2")
    return Seq((phase1, phase2))


def build_inverse_plan(plan: InversionPlan) -> RevProgram:
    n, Q, Inv = plan.n, plan.Q, plan.Inv
    export = Seq(tuple(Prim(add_scaled(Inv.entry(i, k), Q.entry(i, k))) for i in range(n) for k in range(n)))
    return ccu(build_phases(plan), export, "inverse")


def build_inverse(
    arena: Arena, a: MatrixHandle, inv: MatrixHandle | None = None
) -> tuple[RevProgram, MatrixHandle, InversionPlan]:
    """Program adding ``A^-1`` into ``Inv``; returns (program, Inv, plan).

    ``Inv`` must be zero when the program runs.  ``R``, ``P`` and ``Q`` are
    allocated here, are zero before and after every run, and may be freed
    by the caller via :func:`release_plan`.
    """
    plan = make_plan(arena, a, inv)
    return build_inverse_plan(plan), plan.Inv, plan


def release_plan(arena: Arena, plan: InversionPlan) -> None:
    for h in plan.intermediates():
        arena.free(h.cells)


def _zero_pivot(message: str, row: int) -> SingularPivot:
    return SingularPivot(
        f"zero pivot at row {row + 1}; this elimination does not exchange rows ({message})",
        row=row,
    )
