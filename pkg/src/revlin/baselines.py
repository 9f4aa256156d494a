"""Irreversible exact oracles, instrumented for the naive trace transform.

Making an ordinary program reversible by logging every overwritten value
needs one log cell per destructive write.  The oracles below count those
writes instead of storing them, which is all the comparison needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ShapeMismatch, Singular, ZeroPivot

Matrix = list[list[Fraction]]


@dataclass
class TraceReport:
    destructive_writes: int = 0
    irreversible_ops: int = 0
    peak_cells_irreversible: int = 0
    # largest number of distinct cells overwritten by one outer elimination
    # step (inversion only)
    max_step_output: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "destructive_writes": self.destructive_writes,
            "irreversible_ops": self.irreversible_ops,
            "peak_cells_irreversible": self.peak_cells_irreversible,
            "max_step_output": self.max_step_output,
        }


def _as_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def oracle_matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple[Matrix, TraceReport]:
    """Textbook triple loop; one overwrite of C[i][j] per (i, j, k)."""
    a, b = _as_matrix(a), _as_matrix(b)
    m = len(a)
    n = len(a[0]) if m else 0
    if len(b) != n:
        raise ShapeMismatch(f"cannot multiply {m}x{n} by {len(b)}x?")
    p = len(b[0]) if b else 0
    c = [[Fraction(0)] * p for _ in range(m)]
    writes = 0
    for i in range(m):
        for j in range(p):
            for k in range(n):
                c[i][j] += a[i][k] * b[k][j]
                writes += 1
    trace = TraceReport(
        destructive_writes=writes,
        irreversible_ops=2 * m * n * p,
        peak_cells_irreversible=m * n + n * p + m * p,
    )
    return c, trace


def oracle_inverse(a: Sequence[Sequence], pivoting: bool = True) -> tuple[Matrix, TraceReport]:
    """Gauss-Jordan inverse.

    With ``pivoting`` off a zero pivot raises ``ZeroPivot`` (exactly when the
    reversible elimination fails); with it on, rows are exchanged and only a
    truly singular matrix raises ``Singular``.
    """
    x = _as_matrix(a)
    n = len(x)
    if any(len(row) != n for row in x):
        raise ShapeMismatch("matrix is not square")
    y = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    trace = TraceReport(peak_cells_irreversible=2 * n * n)

    def overwrite(mat: Matrix, r: int, k: int, value: Fraction, touched: set) -> None:
        mat[r][k] = value
        trace.destructive_writes += 1
        touched.add((id(mat), r, k))

    for i in range(n):
        if x[i][i] == 0:
            if not pivoting:
                raise ZeroPivot(f"zero pivot at row {i + 1}", row=i)
            swap = next((r for r in range(i + 1, n) if x[r][i] != 0), None)
            if swap is None:
                raise Singular("matrix is singular")
            x[i], x[swap] = x[swap], x[i]
            y[i], y[swap] = y[swap], y[i]
            trace.destructive_writes += 4 * n
        touched: set = set()
        piv = x[i][i]
        for k in range(n):
            overwrite(x, i, k, x[i][k] / piv, touched)
            overwrite(y, i, k, y[i][k] / piv, touched)
            trace.irreversible_ops += 2
        for r in range(i + 1, n):
            f = x[r][i]
            for k in range(n):
                overwrite(x, r, k, x[r][k] - f * x[i][k], touched)
                overwrite(y, r, k, y[r][k] - f * y[i][k], touched)
                trace.irreversible_ops += 4
        trace.max_step_output = max(trace.max_step_output, len(touched))
    for i in reversed(range(n)):
        touched = set()
        for r in range(i):
            f = x[r][i]
            for k in range(n):
                overwrite(x, r, k, x[r][k] - f * x[i][k], touched)
                overwrite(y, r, k, y[r][k] - f * y[i][k], touched)
                trace.irreversible_ops += 4
        trace.max_step_output = max(trace.max_step_output, len(touched))
    return y, trace


def oracle_row_echelon(a: Sequence[Sequence]) -> tuple[Matrix, Matrix]:
    """Forward half of pivot-free elimination: (unit upper echelon, transformed identity)."""
    x = _as_matrix(a)
    n = len(x)
    y = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        piv = x[i][i]
        if piv == 0:
            raise ZeroPivot(f"zero pivot at row {i + 1}", row=i)
        x[i] = [v / piv for v in x[i]]
        y[i] = [v / piv for v in y[i]]
        for r in range(i + 1, n):
            f = x[r][i]
            x[r] = [v - f * w for v, w in zip(x[r], x[i])]
            y[r] = [v - f * w for v, w in zip(y[r], y[i])]
    return x, y


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve ``a x = b`` exactly with partial (first-nonzero) pivoting."""
    n = len(a)
    aug = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for i in range(n):
        r = next((r for r in range(i, n) if aug[r][i] != 0), None)
        if r is None:
            raise Singular("system matrix is singular")
        aug[i], aug[r] = aug[r], aug[i]
        piv = aug[i][i]
        aug[i] = [v / piv for v in aug[i]]
        for r in range(n):
            if r != i and aug[r][i]:
                f = aug[r][i]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[i])]
    return [row[n] for row in aug]


def oracle_ols(prob) -> list[Fraction]:
    """Least-squares coefficients from the (possibly regularized) normal equations.

    ``prob`` is a :class:`revlin.regression.RegressionProblem`.  Solves
    ``(X X^T + n*lam*D) theta = X Y^T`` directly, without forming an inverse.
    """
    x, y = prob.X, prob.Y
    d, n = len(x), len(y)
    gram = [[sum((x[i][k] * x[j][k] for k in range(n)), Fraction(0)) for j in range(d)] for i in range(d)]
    for i, w in enumerate(prob.penalty_diagonal()):
        gram[i][i] += n * prob.lam * w
    rhs = [sum((x[i][k] * y[k] for k in range(n)), Fraction(0)) for i in range(d)]
    return solve(gram, rhs)


def unmodified_step_output(n: int) -> int:
    """Cells one column-clearing step of push elimination overwrites, first step.

    The step rewrites every row below the pivot (and the pivot row) in both
    the matrix and the identity being inverted: ``2 * n * n`` cells.
    """
    return 2 * n * n
