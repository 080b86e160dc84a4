"""Command-line front end: ``laguerre-pep {solve,roots,bench,check,generate}``.

Exit codes: 0 success, 1 a ``check`` found a violation, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import time
from dataclasses import dataclass

import numpy as np

from .bounds import pellet_bounds_for
from .core import EPS, MatrixPolynomial, ScalarPolynomial, Structure
from .dense import default_seed
from .driver import solve
from .generate import KINDS, generate
from .problem_io import ProblemFormatError, emit_json, emit_text, parse_complex, parse_problem
from .report import make_report, to_csv, to_json, to_text
from .scalar import MAX_ITER
from .status import Kind, StopStatus

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

# suite -> (problem kind, varied parameter, fixed value, grid)
SUITES = {
    "scalar-d": ("scalar", "d", 1, (50, 100, 200, 400, 800, 1600, 3200)),
    "general-d": ("general", "d", 2, (50, 100, 200, 400, 800)),
    "general-n": ("general", "n", 2, (20, 40, 80, 160)),
    "hess-d": ("hessenberg-graded", "d", 2, (50, 100, 200, 400, 800)),
    "hess-n": ("hessenberg-graded", "n", 2, (40, 80, 160, 320)),
    "tri-d": ("tridiagonal", "d", 2, (50, 100, 200, 400, 800)),
    "tri-n": ("tridiagonal", "n", 2, (40, 80, 160, 320)),
}
BENCH_COLUMNS = ("suite", "param", "mean_seconds", "max_berr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- bench


@dataclass(frozen=True)
class BenchRow:
    suite: str
    param: int
    mean_seconds: float
    max_berr: float


def bench_problem(suite: str, param: int, seed: int) -> MatrixPolynomial:
    kind, varied, fixed, _ = SUITES[suite]
    n, d = (param, fixed) if varied == "n" else (fixed, param)
    return generate(kind, n, d, seed)


def run_bench(suite: str, repeats: int = 5, seed: int = 0, grid=None) -> list[BenchRow]:
    """Mean wall time and worst backward error per grid point.

    Repeat ``r`` solves the problem generated with seed ``seed + r``. A tiny
    warm-up solve runs first so compilation is not timed.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    grid = SUITES[suite][3] if grid is None else tuple(grid)
    solve(bench_problem(suite, 4, seed))
    rows = []
    for param in grid:
        times, worst = [], 0.0
        for r in range(repeats):
            P = bench_problem(suite, param, seed + r)
            t0 = time.perf_counter()
            res = solve(P, seed=seed)
            times.append(time.perf_counter() - t0)
            worst = max(worst, max(x.berr for x in res))
        rows.append(BenchRow(suite, int(param), float(np.mean(times)), worst))
    return rows


def fitted_slope(rows: list[BenchRow]) -> float:
    """Least-squares slope of log(mean_seconds) against log(param)."""
    x = np.log([r.param for r in rows])
    y = np.log([r.mean_seconds for r in rows])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------- check


def _independent_eta(P: MatrixPolynomial, lam, kind: Kind, x: np.ndarray) -> float:
    """Scaled residual evaluated directly from the coefficients with numpy."""
    norms = np.array([np.linalg.norm(A) for A in P.coeffs])
    if kind is Kind.ZERO:
        M, alpha = P.coeffs[0], norms[0]
    elif kind is Kind.INFINITE:
        M, alpha = P.coeffs[-1], norms[-1]
    elif abs(lam) <= 1:
        powers = lam ** np.arange(P.d + 1)
        M = np.tensordot(powers, P.coeffs, axes=1)
        alpha = float(np.abs(powers) @ norms)
    else:
        rho = 1 / lam
        powers = rho ** np.arange(P.d, -1, -1)
        M = np.tensordot(powers, P.coeffs, axes=1)
        alpha = float(np.abs(powers) @ norms)
    return float(np.linalg.norm(M @ x) / (alpha * np.linalg.norm(x)))


def check_results(P: MatrixPolynomial, results) -> list[str]:
    """Violations found by independent verification (empty when all pass).

    Checks: exactly n*d results; criterion-1 pairs satisfy the
    ``10 (2n+1) eps`` residual bound; every other converged pair has a
    residual below ``sqrt(eps)``; finite eigenvalues lie inside the Pellet
    annulus.
    """
    problems = []
    n, d = P.n, P.d
    if len(results) != n * d:
        problems.append(f"expected {n * d} eigenvalues, got {len(results)}")
    bound1 = 10 * (2 * n + 1) * EPS
    for k, r in enumerate(results):
        if r.status is StopStatus.MAX_ITER:
            continue
        eta = _independent_eta(P, r.eigenvalue, r.kind, r.x)
        limit = bound1 if r.status is StopStatus.CRITERION1 else math.sqrt(EPS)
        if not eta <= limit:
            problems.append(f"eigenvalue #{k} ({r.status.label}): residual {eta:.3e} exceeds {limit:.3e}")
    pb = pellet_bounds_for(P)
    for k, r in enumerate(results):
        if r.kind is Kind.FINITE and not bool(pb.contains(r.lam)):
            problems.append(
                f"eigenvalue #{k}: modulus {abs(r.lam):.6e} outside Pellet annulus [{pb.lower:.6e}, {pb.upper:.6e}]"
            )
    return problems


# ---------------------------------------------------------------- commands


def _write(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_solve(args) -> int:
    P = parse_problem(args.file)
    seed = default_seed(args.seed)
    t0 = time.perf_counter()
    res = solve(P, max_iter=args.max_iter, seed=seed)
    rep = make_report(P, res, seed, time.perf_counter() - t0)
    text = to_json(rep) if args.json else to_csv(rep) if args.csv else to_text(rep)
    _write(text, args.out)
    return EXIT_OK


_COEFF = re.compile(r"^[+-]?[\d.]")


def _split_coeffs(argv: list[str]) -> tuple[list[str], list[str] | None]:
    """Pull ``--coeffs a b c`` out of argv before argparse sees values like ``-1,0``."""
    if "--coeffs" not in argv:
        return argv, None
    i = argv.index("--coeffs")
    j = i + 1
    while j < len(argv) and (_COEFF.match(argv[j]) or argv[j].lower().startswith(("inf", "nan"))):
        j += 1
    return argv[:i] + argv[j:], argv[i + 1 : j]


def cmd_roots(args) -> int:
    if args.coeffs is not None and args.file is not None:
        raise UsageError("roots: give a file or --coeffs, not both")
    if args.coeffs is not None:
        if len(args.coeffs) < 2:
            raise UsageError("roots: --coeffs needs at least two coefficients a_0 ... a_d")
        try:
            a = [parse_complex(t) for t in args.coeffs]
        except ValueError as e:
            raise UsageError(f"roots: {e}") from None
        try:
            w = ScalarPolynomial(a)
        except ValueError as e:
            raise UsageError(f"roots: {e}") from None
        if w.d < 1:
            raise UsageError("roots: the polynomial is constant")
        P = w.to_matrix()
    elif args.file is not None:
        P = parse_problem(args.file)
        if P.n != 1:
            raise UsageError(f"roots: {args.file} is a {P.n}x{P.n} problem; use solve")
        P = MatrixPolynomial(P.coeffs, Structure.SCALAR, P.name)
    else:
        raise UsageError("roots: give a file or --coeffs")
    seed = default_seed(args.seed)
    t0 = time.perf_counter()
    res = solve(P, max_iter=args.max_iter, seed=seed)
    rep = make_report(P, res, seed, time.perf_counter() - t0)
    text = to_json(rep) if args.json else to_csv(rep) if args.csv else to_text(rep)
    _write(text, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = default_seed(args.seed)
    grid = None
    if args.grid:
        try:
            grid = [int(t) for t in args.grid.split(",")]
        except ValueError:
            raise UsageError(f"bench: --grid must be comma-separated integers, got {args.grid!r}") from None
        if any(g < 1 for g in grid):
            raise UsageError("bench: grid values must be positive")
    if args.repeats < 1:
        raise UsageError("bench: --repeats must be at least 1")
    rows = []
    for suite in args.suite:
        rows.extend(run_bench(suite, args.repeats, seed, grid))
        if args.slope:
            sub = [r for r in rows if r.suite == suite]
            if len(sub) >= 2:
                print(f"{suite}: fitted slope {fitted_slope(sub):.3f}", file=sys.stderr)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow([r.suite, r.param, repr(r.mean_seconds), repr(r.max_berr)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_check(args) -> int:
    P = parse_problem(args.file)
    seed = default_seed(args.seed)
    res = solve(P, max_iter=args.max_iter, seed=seed)
    problems = check_results(P, res)
    unconverged = sum(r.status is StopStatus.MAX_ITER for r in res)
    for p in problems:
        print(f"FAIL {p}")
    summary = f"{len(res)} eigenvalues, {len(problems)} violations, {unconverged} hit max_iter"
    print(("OK " if not problems else "FAILED ") + summary)
    return EXIT_OK if not problems else EXIT_CHECK


def cmd_generate(args) -> int:
    try:
        P = generate(args.kind, args.n, args.d, default_seed(args.seed))
    except ValueError as e:
        raise UsageError(f"generate: {e}") from None
    text = emit_json(P) + "\n" if args.json else emit_text(P)
    _write(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="laguerre-pep", description="Polynomial eigenvalue solver based on Laguerre's method.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, with_format=True):
        sp.add_argument("--seed", type=int, default=None, help="seed (default: $POLYEIG_SEED or 0)")
        sp.add_argument("--max-iter", type=int, default=MAX_ITER, help="iterations per eigenvalue")
        if with_format:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--json", action="store_true", help="JSON report")
            g.add_argument("--csv", action="store_true", help="CSV records")
            sp.add_argument("-o", "--out", default=None, help="output file (default stdout)")

    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("file")
    common(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("roots", help="roots of a scalar polynomial")
    s.add_argument("file", nargs="?")
    s.add_argument("--coeffs", nargs="*", metavar="RE,IM", help="coefficients a_0 ... a_d")
    common(s)
    s.set_defaults(func=cmd_roots)

    s = sub.add_parser("bench", help="timing sweeps")
    s.add_argument("--suite", action="append", choices=sorted(SUITES), required=True)
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--grid", default=None, help="override the suite grid, e.g. 20,40,80")
    s.add_argument("--slope", action="store_true", help="print the fitted log-log slope to stderr")
    s.add_argument("-o", "--out", default=None)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("check", help="solve and verify residuals, Pellet bounds and counts")
    s.add_argument("file")
    common(s, with_format=False)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("generate", help="write a random problem file")
    s.add_argument("kind", help=f"one of {', '.join(KINDS)}; rank-deficient-ends(k) sets the nullity")
    s.add_argument("-n", type=int, default=4)
    s.add_argument("-d", type=int, default=2)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--json", action="store_true")
    s.add_argument("-o", "--out", default=None)
    s.set_defaults(func=cmd_generate)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv, coeffs = _split_coeffs(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if coeffs is not None:
            if args.command != "roots":
                raise UsageError("--coeffs is only valid with roots")
            args.coeffs = coeffs
        if getattr(args, "max_iter", 1) < 0:
            raise UsageError("--max-iter must be nonnegative")
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except ProblemFormatError as e:
        print(f"error: {e.diagnostic()}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
