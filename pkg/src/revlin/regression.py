"""Reversible least-squares and ridge fits.

Data follow the column-per-point layout: ``X`` is ``d x n`` with one column
per data point and ``Y`` holds the ``n`` targets.  With ``W = X^T`` the
fit is ``theta = (W^T W + n*lam*D)^-1 W^T Y`` where ``D`` is the identity,
except that the intercept coordinate (a constant-one feature row appended
when ``bias`` is set) is not penalized.

The pipeline

    G = X X^T,  G += n*lam*D,  Ginv = G^-1,  V = X Y^T,  Th = Ginv V

runs as the compute leg of one compute-copy-uncompute block whose copy
leg adds ``Th`` into ``theta``.  Every intermediate lives in a scope, so a
forward run leaves only ``X``, ``Y`` and ``theta`` allocated and nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .arena import Arena, ResourceReport, add_scaled
from .errors import ShapeMismatch
from .inversion import build_inverse_plan, make_plan
from .kernels import (
    MatrixHandle,
    alloc_matrix,
    build_add_scaled_identity,
    build_matmul,
    load_matrix,
    reserve_matrix,
    transpose_view,
)
from .rational import parse_rational
from .rprog import Prim, RevProgram, Seq, ccu, run, scope

Matrix = list[list[Fraction]]


@dataclass(frozen=True)
class RegressionProblem:
    X: Matrix
    Y: list[Fraction]
    lam: Fraction = Fraction(0)
    bias: bool = False

    def __post_init__(self) -> None:
        if not self.X or not self.Y:
            raise ShapeMismatch("need at least one feature and one data point")
        if any(len(row) != len(self.Y) for row in self.X):
            raise ShapeMismatch("every feature row needs one entry per data point")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.bias and any(v != 1 for v in self.X[-1]):
            raise ValueError("bias row must be all ones")

    @classmethod
    def from_points(
        cls,
        points: Sequence[Sequence],
        targets: Sequence,
        lam: Fraction | int | str = 0,
        bias: bool = False,
    ) -> RegressionProblem:
        """Build from row-per-point data, appending a ones row when ``bias``."""
        pts = [[parse_rational(v) for v in p] for p in points]
        if not pts:
            raise ShapeMismatch("no data points")
        width = len(pts[0])
        if any(len(p) != width for p in pts):
            raise ShapeMismatch("points have different numbers of features")
        x = [[p[j] for p in pts] for j in range(width)]
        if bias:
            x.append([Fraction(1)] * len(pts))
        return cls(x, [parse_rational(t) for t in targets], parse_rational(lam), bias)

    @property
    def d(self) -> int:
        return len(self.X)

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def features(self) -> Matrix:
        """Rows of X without the constant bias row."""
        return self.X[:-1] if self.bias else self.X

    def penalty_diagonal(self) -> list[int]:
        w = [1] * self.d
        if self.bias:
            w[-1] = 0
        return w


@dataclass
class FittedModel:
    theta: MatrixHandle
    bias: bool
    coef: list[Fraction] | None = None
    report: ResourceReport | None = None
    buffers: dict[str, MatrixHandle] = field(default_factory=dict)

    def collect(self, arena: Arena) -> list[Fraction]:
        self.coef = [arena.read(self.theta.entry(i, 0)) for i in range(self.theta.rows)]
        return self.coef

    @property
    def weights(self) -> list[Fraction]:
        coef = self._coef()
        return coef[:-1] if self.bias else list(coef)

    @property
    def theta0(self) -> Fraction:
        return self._coef()[-1] if self.bias else Fraction(0)

    def _coef(self) -> list[Fraction]:
        if self.coef is None:
            raise RuntimeError("model has not been fitted; run the program and call collect()")
        return self.coef


def _build(arena: Arena, prob: RegressionProblem, ridge: bool) -> tuple[RevProgram, FittedModel]:
    d, n = prob.d, prob.n
    X = load_matrix(arena, prob.X)
    Y = load_matrix(arena, [prob.Y])
    theta = alloc_matrix(arena, d, 1)

    G = reserve_matrix(arena, d, d)
    Ginv = reserve_matrix(arena, d, d)
    V = reserve_matrix(arena, d, 1)
    Th = reserve_matrix(arena, d, 1)

    plan = make_plan(arena, G, Ginv, live=False)
    inverse = scope(
        plan.R.cells + plan.P.cells + plan.Q.cells, build_inverse_plan(plan), "invert gram"
    )

    steps: list[RevProgram] = [build_matmul(arena, X, transpose_view(X), G, "gram X X^T")]
    if ridge:
        skip = [d - 1] if prob.bias else []
        steps.append(build_add_scaled_identity(G, n * prob.lam, skip))
    steps += [
        inverse,
        build_matmul(arena, X, transpose_view(Y), V, "moment X Y^T"),
        build_matmul(arena, Ginv, V, Th, "solve Ginv V"),
    ]
    export = Seq(tuple(Prim(add_scaled(theta.entry(i, 0), Th.entry(i, 0))) for i in range(d)))
    body = ccu(Seq(tuple(steps)), export, "ridge" if ridge else "ols")
    prog = scope(G.cells + Ginv.cells + V.cells + Th.cells, body, "fit")
    model = FittedModel(theta, prob.bias, buffers={"X": X, "Y": Y, "theta": theta})
    return prog, model


def build_ols(arena: Arena, prob: RegressionProblem) -> tuple[RevProgram, FittedModel]:
    """Program fitting ordinary least squares; loads ``prob`` into ``arena``."""
    if prob.lam != 0:
        raise ValueError("build_ols needs lam == 0; use build_ridge")
    return _build(arena, prob, ridge=False)


def build_ridge(arena: Arena, prob: RegressionProblem) -> tuple[RevProgram, FittedModel]:
    if prob.lam == 0:
        return build_ols(arena, prob)
    return _build(arena, prob, ridge=True)


def fit(arena: Arena, prob: RegressionProblem) -> FittedModel:
    """Build and run the fit forward, then read back the coefficients."""
    prog, model = build_ridge(arena, prob)
    model.report = run(arena, prog)
    model.collect(arena)
    return model


# -- observers: pure functions of values, no arena involved ------------------


def _check_lengths(prob: RegressionProblem, theta: Sequence) -> None:
    if len(theta) != len(prob.features):
        raise ShapeMismatch(f"expected {len(prob.features)} coefficients, got {len(theta)}")


def evaluate_loss(prob: RegressionProblem, theta: Sequence, theta0: Fraction | int = 0) -> Fraction:
    """Mean squared error of ``theta^T x + theta0`` over the data."""
    _check_lengths(prob, theta)
    theta = [Fraction(t) for t in theta]
    feats = prob.features
    total = Fraction(0)
    for i in range(prob.n):
        r = sum((theta[j] * feats[j][i] for j in range(len(theta))), Fraction(theta0)) - prob.Y[i]
        total += r * r
    return total / prob.n


def evaluate_ridge_loss(prob: RegressionProblem, theta: Sequence, theta0: Fraction | int = 0) -> Fraction:
    """Mean squared error plus ``lam * ||theta||^2``; the intercept is not penalized."""
    penalty = sum((Fraction(t) ** 2 for t in theta), Fraction(0))
    return evaluate_loss(prob, theta, theta0) + prob.lam * penalty


def predict(x: Sequence, model: FittedModel) -> Fraction:
    w = model.weights
    if len(x) != len(w):
        raise ShapeMismatch(f"expected {len(w)} features, got {len(x)}")
    return sum((wi * Fraction(xi) for wi, xi in zip(w, x)), model.theta0)


def normal_equations_residual(prob: RegressionProblem, theta: Sequence) -> list[Fraction]:
    """``(X X^T + n*lam*D) theta - X Y^T``; all zeros for an exact fit."""
    x, d, n = prob.X, prob.d, prob.n
    theta = [Fraction(t) for t in theta]
    if len(theta) != d:
        raise ShapeMismatch(f"expected {d} coefficients, got {len(theta)}")
    out = []
    for i in range(d):
        lhs = sum(
            (sum((x[i][k] * x[j][k] for k in range(n)), Fraction(0)) * theta[j] for j in range(d)),
            Fraction(0),
        )
        lhs += n * prob.lam * prob.penalty_diagonal()[i] * theta[i]
        rhs = sum((x[i][k] * prob.Y[k] for k in range(n)), Fraction(0))
        out.append(lhs - rhs)
    return out
