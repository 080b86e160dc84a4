"""One entry point that picks the engine from the structure tag."""

from __future__ import annotations

import numpy as np

from .core import ScalarPolynomial, Structure
from .dense import EigenResult, default_seed, solve_dense
from .hyman import solve_structured
from .scalar import MAX_ITER, root_errors, solve_scalar
from .status import Kind, StopStatus

_STATUS = {int(s): s for s in StopStatus}


def _scalar_results(w: ScalarPolynomial, max_iter: int, seed: int) -> list[EigenResult]:
    sr = solve_scalar(w, max_iter=max_iter, seed=seed)
    berr, cond, reliable = root_errors(w.coeffs, sr.roots)
    zero_roots = bool(w.coeffs[0] == 0)
    # every eigenvector of a 1x1 problem is the scalar 1; one shared read-only copy
    one = np.ones(1, dtype=np.complex128)
    one.flags.writeable = False
    out = []
    # plain Python scalars up front; per-element numpy conversions dominate at small d
    for lam, b, c, ok, it, st in zip(
        sr.roots.tolist(), berr.tolist(), cond.tolist(), reliable.tolist(),
        sr.iterations.tolist(), sr.status.tolist(),
    ):
        zero = zero_roots and lam == 0
        out.append(
            EigenResult(
                Kind.ZERO if zero else Kind.FINITE, None if zero else lam, one, one,
                b, c, _STATUS[st], it, b, ok, abs(lam) > 1.0,
            )
        )
    return out


def solve(P, max_iter: int = MAX_ITER, seed: int | None = None, engine: str | None = None) -> list[EigenResult]:
    """Every eigenvalue of ``P`` (``n*d`` results).

    ``P`` may be a :class:`MatrixPolynomial` or a :class:`ScalarPolynomial`.
    ``engine`` forces ``"dense"``, ``"structured"`` or ``"scalar"``; by default
    the structure tag decides.
    """
    seed = default_seed(seed)
    if isinstance(P, ScalarPolynomial):
        return _scalar_results(P, max_iter, seed)
    if engine is None:
        engine = {
            Structure.SCALAR: "scalar",
            Structure.HESSENBERG: "structured",
            Structure.TRIDIAGONAL: "structured",
        }.get(P.structure, "dense")
    if engine == "scalar":
        return _scalar_results(ScalarPolynomial.from_matrix(P), max_iter, seed)
    if engine == "structured":
        return solve_structured(P, max_iter=max_iter, seed=seed)
    if engine == "dense":
        return solve_dense(P, max_iter=max_iter, seed=seed)
    raise ValueError(f"unknown engine {engine!r}")


def eigenvalues(results: list[EigenResult]) -> np.ndarray:
    return np.array([r.eigenvalue for r in results], dtype=np.complex128)
