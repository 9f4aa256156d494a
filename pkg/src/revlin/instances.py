"""Seeded random problem instances (entries p/q, p in [-9, 9], q in [1, 9])."""

from __future__ import annotations

import random
from fractions import Fraction

from .baselines import oracle_row_echelon
from .errors import ZeroPivot
from .regression import RegressionProblem

Matrix = list[list[Fraction]]


def random_rational(rng: random.Random, span: int = 9) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def random_matrix(rng: random.Random, rows: int, cols: int) -> Matrix:
    return [[random_rational(rng) for _ in range(cols)] for _ in range(rows)]


def has_nonzero_leading_minors(a: Matrix) -> bool:
    try:
        oracle_row_echelon(a)
    except ZeroPivot:
        return False
    return True


def random_eliminable(rng: random.Random, n: int, tries: int = 1000) -> Matrix:
    """Random square matrix whose leading principal minors are all nonzero."""
    for _ in range(tries):
        a = random_matrix(rng, n, n)
        if has_nonzero_leading_minors(a):
            return a
    raise RuntimeError(f"no eliminable {n}x{n} matrix after {tries} draws")


def random_problem(
    rng: random.Random, d: int, n: int, lam: Fraction | int = 0, bias: bool = False, tries: int = 1000
) -> RegressionProblem:
    """Random fit problem with ``d`` coefficients (bias included) and ``n`` points.

    Redrawn until the regularized Gram matrix can be eliminated without
    row exchanges.
    """
    width = d - 1 if bias else d
    for _ in range(tries):
        pts = random_matrix(rng, n, width)
        y = [random_rational(rng) for _ in range(n)]
        prob = RegressionProblem.from_points(pts, y, lam, bias)
        if has_nonzero_leading_minors(gram(prob)):
            return prob
    raise RuntimeError(f"no well-posed d={d}, n={n} problem after {tries} draws")


def gram(prob: RegressionProblem) -> Matrix:
    """``X X^T + n*lam*D`` as values."""
    x, n = prob.X, prob.n
    g = [[sum((xi[k] * xj[k] for k in range(n)), Fraction(0)) for xj in x] for xi in x]
    for i, w in enumerate(prob.penalty_diagonal()):
        g[i][i] += n * prob.lam * w
    return g
