"""Reversible exact linear algebra: matrix products, inversion, least squares and ridge fits."""

from .arena import (
    BACKWARD,
    FORWARD,
    Arena,
    CellId,
    Direction,
    Kind,
    Primitive,
    ResourceReport,
)
from .errors import (
    AliasViolation,
    CopyOverlap,
    DivideByZero,
    GarbageLeak,
    InvalidCell,
    NonInvertible,
    OverlapError,
    ReversibleError,
    RevlinError,
    ShapeMismatch,
    Singular,
    SingularPivot,
    ZeroPivot,
)
from .inversion import build_inverse
from .kernels import MatrixHandle, build_add_scaled_identity, build_matmul, load_matrix, transpose_view
from .regression import (
    FittedModel,
    RegressionProblem,
    build_ols,
    build_ridge,
    evaluate_loss,
    evaluate_ridge_loss,
    fit,
    predict,
)
from .rprog import Ccu, Inverse, Prim, Scope, Seq, ccu, invert, pretty, run

__version__ = "0.1.0"
