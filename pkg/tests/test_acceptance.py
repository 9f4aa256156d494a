"""Exit criteria.  Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -s -v``.
"""

import json
import random
import time
from fractions import Fraction

from revlin.arena import BACKWARD, Arena
from revlin.baselines import oracle_inverse, oracle_matmul, oracle_ols
from revlin.cli import main
from revlin.errors import SingularPivot
from revlin.instances import random_eliminable, random_matrix, random_problem
from revlin.inversion import build_inverse, release_plan
from revlin.kernels import alloc_matrix, build_matmul, identity, load_matrix, matmul_values, unload_matrix
from revlin.regression import build_ridge, evaluate_loss, evaluate_ridge_loss, normal_equations_residual
from revlin.rprog import run

TENTH = Fraction(1, 10)


def verdict(capsys, number, title, ok, detail=""):
    with capsys.disabled():
        print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {number} failed: {detail}"


def positive_rational(rng):
    return Fraction(rng.randint(1, 9), rng.randint(1, 9))


# -- instance builders: each returns (program, read outputs, release buffers) --


def matmul_case(arena, a, b):
    A, B = load_matrix(arena, a), load_matrix(arena, b)
    C = alloc_matrix(arena, len(a), len(b[0]))
    prog = build_matmul(arena, A, B, C)

    def release():
        arena.free(C.cells)
        unload_matrix(arena, A)
        unload_matrix(arena, B)

    return prog, lambda: C.read(arena), release


def inverse_case(arena, a):
    A = load_matrix(arena, a)
    prog, inv, plan = build_inverse(arena, A)

    def release():
        release_plan(arena, plan)
        arena.free(inv.cells)
        unload_matrix(arena, A)

    return prog, lambda: inv.read(arena), release


def fit_case(arena, prob):
    prog, model = build_ridge(arena, prob)

    def release():
        arena.free(model.theta.cells)
        unload_matrix(arena, model.buffers["X"])
        unload_matrix(arena, model.buffers["Y"])

    return prog, lambda: model.collect(arena), release


def random_fit_problem(rng, ridge):
    d = rng.randint(1, 3)
    n = rng.randint(d + 1, 8)
    lam = positive_rational(rng) if ridge else 0
    return random_problem(rng, d, n, lam, bias=rng.random() < 0.5)


# -- criteria -------------------------------------------------------------------


def test_1_round_trip_reversibility(capsys):
    rng = random.Random(1)
    started = time.perf_counter()
    failures = 0
    for trial in range(500):
        arena = Arena()
        kind = trial % 3
        if kind == 0:
            m, n, p = (rng.randint(1, 6) for _ in range(3))
            prog, _, release = matmul_case(arena, random_matrix(rng, m, n), random_matrix(rng, n, p))
        elif kind == 1:
            prog, _, release = inverse_case(arena, random_eliminable(rng, rng.randint(1, 6)))
        else:
            prog, _, release = fit_case(arena, random_fit_problem(rng, ridge=rng.random() < 0.5))
        before = arena.snapshot()
        report = run(arena, prog)
        run(arena, prog, BACKWARD)
        ok = arena.snapshot() == before and report.garbage_cells == 0
        release()  # GarbageLeak would propagate and fail the test
        failures += (not ok) or arena.live_count != 0
    elapsed = time.perf_counter() - started
    verdict(
        capsys, 1, "forward+backward restores every cell exactly, transients free cleanly",
        failures == 0 and elapsed < 120, f"500 programs, {failures} failures, {elapsed:.1f}s",
    )


def test_2_oracle_equality(capsys):
    rng = random.Random(2)
    mismatches = {"matmul": 0, "inverse": 0, "ols": 0, "ridge": 0}
    for _ in range(200):
        m, n, p = (rng.randint(1, 6) for _ in range(3))
        a, b = random_matrix(rng, m, n), random_matrix(rng, n, p)
        arena = Arena()
        prog, out, _ = matmul_case(arena, a, b)
        run(arena, prog)
        mismatches["matmul"] += out() != oracle_matmul(a, b)[0]

        a = random_eliminable(rng, rng.randint(1, 6))
        arena = Arena()
        prog, out, _ = inverse_case(arena, a)
        run(arena, prog)
        mismatches["inverse"] += out() != oracle_inverse(a, pivoting=True)[0]

        for key in ("ols", "ridge"):
            prob = random_fit_problem(rng, ridge=key == "ridge")
            arena = Arena()
            prog, out, _ = fit_case(arena, prob)
            run(arena, prog)
            mismatches[key] += out() != oracle_ols(prob)
    verdict(capsys, 2, "outputs equal the irreversible oracles (200 each)", not any(mismatches.values()), str(mismatches))


def test_3_inverse_identity(capsys):
    rng = random.Random(3)
    bad = 0
    for _ in range(200):
        n = rng.randint(1, 8)
        a = random_eliminable(rng, n)
        arena = Arena()
        prog, out, _ = inverse_case(arena, a)
        run(arena, prog)
        inv = out()
        bad += matmul_values(a, inv) != identity(n) or matmul_values(inv, a) != identity(n)
    verdict(capsys, 3, "A*Inv = Inv*A = I exactly, n <= 8", bad == 0, f"200 matrices, {bad} failures")


def _split(prob, coef):
    return (coef[:-1], coef[-1]) if prob.bias else (coef, 0)


def test_4_normal_equations_and_minimality(capsys):
    rng = random.Random(4)
    residual_bad = loss_bad = 0
    fits = 0
    for trial in range(100):
        ridge = trial % 2 == 1
        prob = random_fit_problem(rng, ridge)
        arena = Arena()
        prog, out, _ = fit_case(arena, prob)
        run(arena, prog)
        coef = out()
        fits += 1
        residual_bad += any(normal_equations_residual(prob, coef))
        loss = evaluate_ridge_loss if ridge else evaluate_loss
        best = loss(prob, *_split(prob, coef))
        for i in range(len(coef)):
            for delta in (TENTH, -TENTH):
                moved = list(coef)
                moved[i] += delta
                loss_bad += best > loss(prob, *_split(prob, moved))
    verdict(
        capsys, 4, "normal equations exact; loss <= loss at 2d perturbations of 1/10",
        residual_bad == 0 and loss_bad == 0, f"{fits} fits, {residual_bad} residual / {loss_bad} loss failures",
    )


def test_5_matmul_constant_ancilla(capsys):
    rng = random.Random(5)
    peaks = {}
    for n in (2, 4, 8, 16, 32):
        arena = Arena()
        prog, _, _ = matmul_case(arena, random_matrix(rng, n, n), random_matrix(rng, n, n))
        peaks[n] = run(arena, prog).transient_peak
    verdict(capsys, 5, "matmul transient ancilla identical for n in {2,4,8,16,32}", len(set(peaks.values())) == 1, str(peaks))


def test_6_matmul_time(capsys):
    rng = random.Random(6)
    bad = []
    shapes = [(n, n, n) for n in (2, 4, 8, 16)] + [(1, 5, 3), (6, 2, 4), (3, 6, 1), (5, 5, 2)]
    for m, n, p in shapes:
        arena = Arena()
        a, b = random_matrix(rng, m, n), random_matrix(rng, n, p)
        prog, _, _ = matmul_case(arena, a, b)
        fwd = run(arena, prog).primitive_ops
        bwd = run(arena, prog, BACKWARD).primitive_ops
        oracle_ops = oracle_matmul(a, b)[1].irreversible_ops
        if fwd != 3 * m * n * p or oracle_ops != 2 * m * n * p or fwd + bwd > 4 * oracle_ops:
            bad.append((m, n, p, fwd, bwd, oracle_ops))
    verdict(capsys, 6, "forward ops = 3mnp; forward+backward <= 4 * 2mnp", not bad, f"{len(shapes)} shapes, bad={bad}")


def _dominant(rng, n):
    a = random_matrix(rng, n, n)
    for i in range(n):
        a[i][i] += 10 * n
    return a


def test_7_inversion_space_and_time(capsys):
    rng = random.Random(7)
    per_n, ops, push = {}, {}, {}
    for n in (4, 8, 16):
        a = _dominant(rng, n)
        arena = Arena()
        prog, _, _ = inverse_case(arena, a)
        report = run(arena, prog)
        per_n[n] = report.transient_peak / n
        ops[n] = report.primitive_ops
        push[n] = oracle_inverse(a, pivoting=False)[1].max_step_output
    spread = max(per_n.values()) / min(per_n.values())
    time_ratios = [ops[8] / ops[4], ops[16] / ops[8]]
    push_ratios = [push[8] / push[4], push[16] / push[8]]
    ok = spread < 1.5 and all(6 <= r <= 10 for r in time_ratios) and all(3.5 <= r <= 4.5 for r in push_ratios)
    verdict(
        capsys, 7, "inversion transient O(n), unmodified step output O(n^2), ops cubic", ok,
        f"transient/n={per_n}, ops ratios={[round(r, 3) for r in time_ratios]}, "
        f"push step output={push}",
    )


def test_8_trace_transform_contrast(capsys):
    rng = random.Random(8)
    writes, peak = {}, {}
    for n in (4, 8, 16):
        a, b = random_matrix(rng, n, n), random_matrix(rng, n, n)
        arena = Arena()
        prog, _, _ = matmul_case(arena, a, b)
        peak[n] = run(arena, prog).peak_live_cells
        writes[n] = oracle_matmul(a, b)[1].destructive_writes
    exact = all(writes[n] == n**3 for n in writes)
    growth = [peak[8] / peak[4], peak[16] / peak[8]]
    quadratic = all(3.5 <= g <= 4.5 for g in growth)
    blowup = {n: writes[n] / peak[n] for n in writes}
    verdict(
        capsys, 8, "trace cells = n^3, reversible peak quadratic, blow-up ratio doubles",
        exact and quadratic and blowup[16] >= 2 * blowup[8],
        f"peak growth={[round(g, 3) for g in growth]}, blow-up={ {n: round(v, 3) for n, v in blowup.items()} }",
    )


def test_9_ols_scaling(capsys, tmp_path):
    out = tmp_path / "bench.json"
    code = main(["bench", "--op", "ols", "--dim", "4", "--max", "64", "--metrics", str(out)])
    printed = capsys.readouterr().out
    doc = json.loads(out.read_text())
    ops = {r["dims"]["n"]: r["resource"]["primitive_ops"] for r in doc["runs"]}
    ratio = ops[64] / ops[32]
    reported = str(ops[32]) in printed and str(ops[64]) in printed
    verdict(
        capsys, 9, "OLS d=4: ops(n=64)/ops(n=32) in [1.7, 2.3], counts in bench output",
        code == 0 and 1.7 <= ratio <= 2.3 and reported, f"ops={ops}, ratio={ratio:.4f}",
    )


def test_10_pivot_semantics(capsys, tmp_path):
    perm = [[0, 1], [1, 0]]
    arena = Arena()
    prog, _, _ = inverse_case(arena, perm)
    raised = False
    try:
        run(arena, prog)
    except SingularPivot:
        raised = True
    oracle_ok = oracle_inverse(perm, pivoting=True)[0] == perm
    path = tmp_path / "perm2.txt"
    path.write_text("0 1\n1 0\n")
    code = main(["invert", str(path)])
    err = capsys.readouterr().err
    golden = err == (
        "error: needs pivoting: the matrix is invertible but has a zero leading minor at row 1; "
        "this elimination does not exchange rows\n"
    )
    verdict(
        capsys, 10, "[[0,1],[1,0]]: SingularPivot, pivoted oracle inverts, CLI exit 2 'needs pivoting'",
        raised and oracle_ok and code == 2 and golden, f"raised={raised}, oracle={oracle_ok}, exit={code}",
    )
