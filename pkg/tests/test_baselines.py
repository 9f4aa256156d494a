from fractions import Fraction

import pytest

from revlin.baselines import oracle_inverse, oracle_matmul, oracle_ols, oracle_row_echelon, solve, unmodified_step_output
from revlin.errors import ShapeMismatch, Singular, ZeroPivot
from revlin.instances import random_matrix
from revlin.kernels import identity, matmul_values
from revlin.regression import RegressionProblem


def test_matmul_identity(rng):
    a = random_matrix(rng, 3, 3)
    assert oracle_matmul(identity(3), a)[0] == a


def test_matmul_trace_counts():
    for n in (2, 4, 8):
        _, trace = oracle_matmul(identity(n), identity(n))
        assert trace.destructive_writes == n**3
        assert trace.irreversible_ops == 2 * n**3
    assert oracle_matmul(identity(8), identity(8))[1].destructive_writes / oracle_matmul(identity(4), identity(4))[1].destructive_writes == 8


def test_matmul_shape():
    with pytest.raises(ShapeMismatch):
        oracle_matmul([[1, 2]], [[1, 2]])


def test_inverse_identity():
    assert oracle_inverse(identity(3))[0] == identity(3)


def test_permutation_pivoting():
    perm = [[0, 1], [1, 0]]
    assert oracle_inverse(perm, pivoting=True)[0] == perm
    with pytest.raises(ZeroPivot):
        oracle_inverse(perm, pivoting=False)


def test_singular():
    with pytest.raises(Singular):
        oracle_inverse([[1, 2], [2, 4]])


def test_random_inverse_self_check(rng):
    for _ in range(5):
        a = random_matrix(rng, 5, 5)
        try:
            inv, _ = oracle_inverse(a)
        except Singular:
            continue
        assert matmul_values(a, inv) == identity(5)
        assert matmul_values(inv, a) == identity(5)


def test_push_step_output_quadratic():
    outs = {}
    for n in (4, 8, 16):
        a = [[Fraction(10 * n if i == j else 1) for j in range(n)] for i in range(n)]
        outs[n] = oracle_inverse(a, pivoting=False)[1].max_step_output
        assert outs[n] == unmodified_step_output(n)
    assert outs[8] / outs[4] == 4 and outs[16] / outs[8] == 4


def test_row_echelon():
    r, p = oracle_row_echelon([[2, 4], [1, 3]])
    assert r == [[1, 2], [0, 1]]
    assert p == [[Fraction(1, 2), 0], [Fraction(-1, 2), 1]]


def test_solve():
    assert solve([[0, 1], [1, 0]], [2, 3]) == [3, 2]


def test_ols_exact_line():
    prob = RegressionProblem.from_points([[0], [1], [2]], [1, 3, 5], bias=True)
    assert oracle_ols(prob) == [2, 1]
