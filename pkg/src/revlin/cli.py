"""``revlin`` command line.

Exit codes: 0 ok, 1 bad input (parse errors, shape mismatches, bit-width
guard), 2 zero pivot (singular, or nonsingular but needing row exchanges),
3 reversibility failure (garbage left behind or inexact round trip).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .arena import BACKWARD, Arena
from .baselines import TraceReport, oracle_inverse, oracle_matmul, oracle_ols
from .errors import (
    BitWidthExceeded,
    GarbageLeak,
    ParseError,
    RevlinError,
    ShapeMismatch,
    Singular,
    SingularPivot,
)
from .instances import gram, random_eliminable, random_matrix, random_problem
from .inversion import build_inverse, release_plan
from .kernels import alloc_matrix, build_matmul, load_matrix, unload_matrix
from .rational import format_decimal, format_rational, parse_rational
from .regression import RegressionProblem, build_ridge
from .rprog import RevProgram, run
from .textio import format_matrix, read_csv, read_matrix

EXIT_OK, EXIT_INPUT, EXIT_PIVOT, EXIT_REVERSIBILITY = 0, 1, 2, 3

Matrix = list[list[Fraction]]


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit 2 is reserved for zero pivots
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class PivotFailure(Exception):
    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class RoundTripFailure(Exception):
    pass


def max_bits_from_env() -> int | None:
    raw = os.environ.get("REVLIN_MAX_BITS", "").strip()
    if not raw:
        return None
    try:
        limit = int(raw)
    except ValueError:
        raise ParseError(f"REVLIN_MAX_BITS must be an integer, got {raw!r}") from None
    if limit <= 0:
        raise ParseError("REVLIN_MAX_BITS must be positive")
    return limit


def classify_zero_pivot(matrix: Matrix, err: SingularPivot, what: str = "matrix") -> str:
    """Tell a singular matrix apart from one that only needs row exchanges."""
    row = (err.row or 0) + 1
    try:
        oracle_inverse(matrix, pivoting=True)
    except Singular:
        return f"singular: the {what} has no inverse (zero pivot at row {row})"
    return (
        f"needs pivoting: the {what} is invertible but has a zero leading minor at row {row}; "
        "this elimination does not exchange rows"
    )


# -- jobs ---------------------------------------------------------------------


@dataclass
class Job:
    command: str
    dims: dict[str, int]
    arena: Arena
    prog: RevProgram
    outputs: Callable[[], dict[str, Any]]
    release: Callable[[], None]
    oracle: Callable[[], tuple[dict[str, Any], TraceReport | None]]
    pivot_matrix: Matrix | None = None
    pivot_what: str = "matrix"
    extra: dict[str, Any] = field(default_factory=dict)


def matmul_job(a: Matrix, b: Matrix, arena: Arena) -> Job:
    if len(a[0]) != len(b):
        raise ShapeMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    A, B = load_matrix(arena, a), load_matrix(arena, b)
    C = alloc_matrix(arena, len(a), len(b[0]))
    prog = build_matmul(arena, A, B, C)

    def release() -> None:
        arena.free(C.cells)
        unload_matrix(arena, A)
        unload_matrix(arena, B)

    def oracle():
        c, trace = oracle_matmul(a, b)
        return {"C": c}, trace

    return Job(
        "matmul",
        {"m": len(a), "n": len(b), "p": len(b[0])},
        arena,
        prog,
        lambda: {"C": C.read(arena)},
        release,
        oracle,
    )


def invert_job(a: Matrix, arena: Arena) -> Job:
    if any(len(r) != len(a) for r in a):
        raise ShapeMismatch(f"cannot invert a {len(a)}x{len(a[0])} matrix")
    A = load_matrix(arena, a)
    prog, inv, plan = build_inverse(arena, A)

    def release() -> None:
        release_plan(arena, plan)
        arena.free(inv.cells)
        unload_matrix(arena, A)

    def oracle():
        y, trace = oracle_inverse(a, pivoting=False)
        return {"inverse": y}, trace

    return Job(
        "invert",
        {"n": len(a)},
        arena,
        prog,
        lambda: {"inverse": inv.read(arena)},
        release,
        oracle,
        pivot_matrix=a,
    )


def regress_job(prob: RegressionProblem, arena: Arena) -> Job:
    prog, model = build_ridge(arena, prob)

    def outputs() -> dict[str, Any]:
        model.collect(arena)
        return {"theta": model.weights, "theta0": model.theta0 if prob.bias else None}

    def release() -> None:
        arena.free(model.theta.cells)
        unload_matrix(arena, model.buffers["X"])
        unload_matrix(arena, model.buffers["Y"])

    def oracle():
        coef = oracle_ols(prob)
        if prob.bias:
            return {"theta": coef[:-1], "theta0": coef[-1]}, None
        return {"theta": coef, "theta0": None}, None

    what = "regularized Gram matrix W^T W + n*lambda*I" if prob.lam else "Gram matrix W^T W"
    dims = {"d": prob.d, "n": prob.n}
    return Job(
        "regress", dims, arena, prog, outputs, release, oracle,
        pivot_matrix=gram(prob), pivot_what=what, extra={"lambda": format_rational(prob.lam)},
    )


def _encode(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    return value


def execute_job(job: Job, verify: bool, compare: bool, timing: bool = False) -> dict[str, Any]:
    """Run ``job`` forward (and back, with ``verify``) and build its metrics document.

    Raises ``PivotFailure`` on a zero pivot and ``RoundTripFailure`` when the
    reversibility contract is broken.
    """
    arena = job.arena
    before = arena.snapshot() if verify else None
    started = time.perf_counter()
    try:
        report = run(arena, job.prog)
    except SingularPivot as err:
        if job.pivot_matrix is None:
            raise
        raise PivotFailure(classify_zero_pivot(job.pivot_matrix, err, job.pivot_what)) from err
    elapsed = time.perf_counter() - started
    if report.garbage_cells:
        raise RoundTripFailure(f"{report.garbage_cells} cell(s) left as garbage after uncompute")
    outputs = job.outputs()

    doc: dict[str, Any] = {"command": job.command, "dims": dict(job.dims)}
    doc.update(job.extra)
    doc["resource"] = report.as_dict()
    if compare:
        expected, trace = job.oracle()
        oracle: dict[str, Any] = trace.as_dict() if trace else {}
        oracle["matches"] = expected == outputs
        doc["oracle"] = oracle
    if verify:
        run(arena, job.prog, BACKWARD)
        restored = arena.snapshot() == before
        try:
            job.release()
        except GarbageLeak:
            restored = False
        restored = restored and arena.live_count == 0
        doc["verified_roundtrip"] = restored
    doc["outputs"] = _encode(outputs)
    if timing:
        doc["timing"] = {"wall_seconds": round(elapsed, 6)}
    return doc


# -- printing -----------------------------------------------------------------


def _fmt(v: Fraction, decimal: int | None) -> str:
    return format_rational(v) if decimal is None else format_decimal(v, decimal)


def print_outputs(job: Job, outputs: dict[str, Any], decimal: int | None) -> None:
    approx = "" if decimal is None else f"  (approximate, {decimal} decimal places)"
    if job.command == "regress":
        theta = ", ".join(_fmt(v, decimal) for v in outputs["theta"])
        print(f"theta = ({theta}){approx}")
        if outputs["theta0"] is not None:
            print(f"theta0 = {_fmt(outputs['theta0'], decimal)}{approx}")
        return
    key = "C" if job.command == "matmul" else "inverse"
    if approx:
        print(f"#{approx.strip()}")
    print(format_matrix(outputs[key], decimal))


def write_metrics(path: str | None, doc: Any) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def _decode_outputs(doc: dict[str, Any]) -> dict[str, Any]:
    def dec(v: Any) -> Any:
        if isinstance(v, str):
            return parse_rational(v)
        if isinstance(v, list):
            return [dec(x) for x in v]
        return v

    return {k: dec(v) for k, v in doc["outputs"].items()}


# -- subcommands --------------------------------------------------------------


def _run_and_report(job: Job, args: argparse.Namespace) -> int:
    doc = execute_job(job, args.verify, args.compare, args.timing)
    print_outputs(job, _decode_outputs(doc), args.decimal)
    if args.compare and not doc["oracle"]["matches"]:
        print("warning: result differs from the irreversible oracle", file=sys.stderr)
    write_metrics(args.metrics, doc)
    if args.verify and not doc["verified_roundtrip"]:
        print("error: backward run did not restore the initial state", file=sys.stderr)
        return EXIT_REVERSIBILITY
    return EXIT_OK


def cmd_regress(args: argparse.Namespace) -> int:
    _, points, targets = read_csv(args.data)
    lam = parse_rational(args.ridge) if args.ridge is not None else Fraction(0)
    prob = RegressionProblem.from_points(points, targets, lam, args.bias)
    job = regress_job(prob, Arena(max_bits_from_env()))
    try:
        return _run_and_report(job, args)
    except PivotFailure as err:
        hint = "" if lam else "; consider --ridge"
        raise PivotFailure(err.message + hint) from err


def cmd_invert(args: argparse.Namespace) -> int:
    return _run_and_report(invert_job(read_matrix(args.matrix), Arena(max_bits_from_env())), args)


def cmd_matmul(args: argparse.Namespace) -> int:
    job = matmul_job(read_matrix(args.a), read_matrix(args.b), Arena(max_bits_from_env()))
    return _run_and_report(job, args)


def random_job(op: str, size: int, seed: int, dim: int = 4, lam: Fraction = Fraction(1, 2)) -> Job:
    """Seeded random instance of ``op`` at ``size``."""
    rng = random.Random(f"{seed}:{op}:{size}")
    arena = Arena(max_bits_from_env())
    if op == "matmul":
        return matmul_job(random_matrix(rng, size, size), random_matrix(rng, size, size), arena)
    if op == "invert":
        return invert_job(random_eliminable(rng, size), arena)
    if op in ("ols", "ridge"):
        prob = random_problem(rng, dim, size, lam if op == "ridge" else 0, bias=True)
        return regress_job(prob, arena)
    raise ValueError(f"unknown op {op!r}")


def cmd_verify(args: argparse.Namespace) -> int:
    job = random_job(args.op, args.size, args.seed, args.dim, parse_rational(args.ridge))
    doc = execute_job(job, verify=True, compare=args.compare, timing=args.timing)
    ok = doc["verified_roundtrip"] and doc["resource"]["garbage_cells"] == 0
    line = f"{args.op} size={args.size}: round trip {'exact' if ok else 'FAILED'}"
    line += f", {doc['resource']['primitive_ops']} ops, transient peak {doc['resource']['transient_peak']}"
    if args.compare:
        line += f", oracle {'agrees' if doc['oracle']['matches'] else 'DISAGREES'}"
    print(line)
    write_metrics(args.metrics, doc)
    if args.compare and not doc["oracle"]["matches"]:
        return EXIT_REVERSIBILITY
    return EXIT_OK if ok else EXIT_REVERSIBILITY


def bench_sizes(max_size: int) -> list[int]:
    sizes, s = [], 4
    while s <= max_size:
        sizes.append(s)
        s *= 2
    return sizes


def bench_point(op: str, size: int, seed: int, dim: int, lam: str, compare: bool, timing: bool) -> dict:
    job = random_job(op, size, seed, dim, parse_rational(lam))
    doc = execute_job(job, verify=True, compare=compare, timing=timing)
    doc.pop("outputs")
    return doc


def growth_summary(docs: Sequence[dict], key: str) -> list[dict[str, Any]]:
    out = []
    for lo, hi in zip(docs, docs[1:]):
        entry: dict[str, Any] = {"from": lo["dims"][key], "to": hi["dims"][key]}
        for metric in ("primitive_ops", "peak_live_cells", "transient_peak"):
            a, b = lo["resource"][metric], hi["resource"][metric]
            entry[f"{metric}_ratio"] = round(b / a, 4) if a else None
        if "oracle" in lo and "destructive_writes" in lo["oracle"]:
            blow = [d["oracle"]["destructive_writes"] / d["resource"]["peak_live_cells"] for d in (lo, hi)]
            entry["trace_blowup_ratio"] = round(blow[1] / blow[0], 4)
        out.append(entry)
    return out


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = bench_sizes(args.max)
    if not sizes:
        raise ParseError("--max must be at least 4")
    params = [(args.op, s, args.seed, args.dim, args.ridge, args.compare, args.timing) for s in sizes]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            docs = list(pool.map(bench_point, *zip(*params)))
    else:
        docs = [bench_point(*p) for p in params]

    key = "n"
    print(f"{'size':>6} {'ops':>12} {'peak_live':>10} {'transient':>10} {'max_bits':>9} {'roundtrip':>9}")
    for size, doc in zip(sizes, docs):
        r = doc["resource"]
        print(
            f"{size:>6} {r['primitive_ops']:>12} {r['peak_live_cells']:>10} "
            f"{r['transient_peak']:>10} {r['max_bits']:>9} {str(doc['verified_roundtrip']):>9}"
        )
    growth = growth_summary(docs, key if args.op != "matmul" else "m")
    for g in growth:
        print(
            f"{g['from']}->{g['to']}: ops x{g['primitive_ops_ratio']}, "
            f"peak_live x{g['peak_live_cells_ratio']}, transient x{g['transient_peak_ratio']}"
            + (f", trace blow-up x{g['trace_blowup_ratio']}" if "trace_blowup_ratio" in g else "")
        )
    write_metrics(args.metrics, {"command": "bench", "op": args.op, "runs": docs, "growth": growth})
    if not all(d["verified_roundtrip"] for d in docs):
        return EXIT_REVERSIBILITY
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metrics", metavar="PATH", help="write a JSON metrics document")
    p.add_argument("--verify", action="store_true", help="also run backward and check exact restoration")
    p.add_argument("--compare", action="store_true", help="compare with the irreversible oracle")
    p.add_argument("--decimal", type=int, metavar="DIGITS", help="print rounded decimals (approximate)")
    p.add_argument("--timing", action="store_true", help="record wall time in the metrics document")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="revlin", description="Reversible exact linear algebra and regression.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("regress", help="fit least squares (or ridge) to a CSV")
    p.add_argument("data", help="CSV: header, feature columns, target last")
    p.add_argument("--bias", action="store_true", help="fit an intercept")
    p.add_argument("--ridge", metavar="LAMBDA", help="ridge penalty (rational)")
    _common(p)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("invert", help="invert a matrix file")
    p.add_argument("matrix")
    _common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("matmul", help="multiply two matrix files")
    p.add_argument("a")
    p.add_argument("b")
    _common(p)
    p.set_defaults(func=cmd_matmul)

    ops = ["matmul", "invert", "ols", "ridge"]
    p = sub.add_parser("verify", help="round-trip check on a random instance")
    p.add_argument("--op", choices=ops, required=True)
    p.add_argument("--size", type=int, required=True, help="matrix order, or number of points")
    p.add_argument("--dim", type=int, default=2, help="coefficients for ols/ridge, intercept included")
    p.add_argument("--ridge", default="1/2", metavar="LAMBDA", help="penalty for --op ridge")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare", action="store_true")
    p.add_argument("--metrics", metavar="PATH")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="resource sweep over sizes 4, 8, 16, ...")
    p.add_argument("--op", choices=ops, default="matmul")
    p.add_argument("--max", type=int, default=32, help="largest size in the sweep")
    p.add_argument("--dim", type=int, default=4, help="coefficients for ols/ridge, intercept included")
    p.add_argument("--ridge", default="1/2", metavar="LAMBDA")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="sweep points run in parallel processes")
    p.add_argument("--compare", action="store_true")
    p.add_argument("--metrics", metavar="PATH")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PivotFailure as err:
        print(f"error: {err.message}", file=sys.stderr)
        return EXIT_PIVOT
    except (RoundTripFailure, GarbageLeak) as err:
        print(f"error: reversibility violated: {err}", file=sys.stderr)
        return EXIT_REVERSIBILITY
    except BitWidthExceeded as err:
        print(f"error: REVLIN_MAX_BITS exceeded: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (RevlinError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
