"""Laguerre iteration for upper Hessenberg and tridiagonal matrix polynomials.

The corrections come from Hyman's method, which evaluates the logarithmic
derivatives of det P with one back-substitution sweep instead of a full
factorization. A Givens QR without pivoting still supplies the stopping
tests and the eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _hyman_kernels as H
from ._dense_kernels import lambda_sums
from .core import MatrixPolynomial, Structure, coefficient_weights, eval_reversal, eval_with_derivatives
from .dense import EigenResult, QRPFactors, RunInfo, default_seed, null_results, probe_vector
from .prep import EstimateSet, initial_estimates
from .scalar import MAX_ITER, unit_kicks
from .status import Kind, StopStatus

_STRUCTURED = (Structure.HESSENBERG, Structure.TRIDIAGONAL)


@dataclass(frozen=True)
class HymanValues:
    """``b`` and its derivatives share an arbitrary scale with ``x_work``;
    only ratios such as ``b1 / b`` are meaningful."""

    b: complex
    b1: complex
    b2: complex
    q_ratio1: complex
    q_ratio2: complex
    x_work: tuple
    at_reversal: bool = False


def _require_structured(P: MatrixPolynomial):
    if P.structure not in _STRUCTURED:
        raise ValueError(f"structured engine needs a hessenberg or tridiagonal problem, got {P.structure.value}")


def hyman_eval(P: MatrixPolynomial, lam: complex, at_reversal: bool = False) -> HymanValues:
    """Hyman quantities of P at ``lam``, or of rP at ``lam`` when ``at_reversal``."""
    _require_structured(P)
    t = eval_reversal(P, lam) if at_reversal else eval_with_derivatives(P, lam)
    V, V1, V2 = t.value, t.deriv1, t.deriv2
    b, b1, b2, q1, q2, x, x1, x2 = H.hyman_dense(V, V1, V2)
    n = P.n
    return HymanValues(
        complex(b), complex(b1), complex(b2), complex(q1), complex(q2),
        (x[: n - 1].copy(), x1[: n - 1].copy(), x2[: n - 1].copy()), at_reversal,
    )


def laguerre_correction_hyman(v: HymanValues, nd_total: int, lam: complex):
    """``(s1, s2) = (p'/p, -(p'/p)')`` at ``lam``; reversal values are mapped back."""
    r1, r2, ok = H.hyman_sums(v.b, v.b1, v.b2, v.q_ratio1, v.q_ratio2)
    if not ok:
        raise ZeroDivisionError("b vanished; lam is an eigenvalue")
    s1, s2 = lambda_sums(r1, r2, complex(lam), v.at_reversal, nd_total)
    return complex(s1), complex(s2)


def _rotations_to_q(c, s, n):
    Q = np.eye(n, dtype=np.complex128)
    for k in range(c.shape[0] - 1, -1, -1):
        u = Q[k].copy()
        v = Q[k + 1].copy()
        Q[k] = c[k] * u - s[k] * v
        Q[k + 1] = np.conj(s[k]) * u + c[k] * v
    return Q


def hessenberg_qr(M: np.ndarray, at_reversal: bool = False):
    """Givens QR of a Hessenberg matrix. Returns the factors (identity
    permutation, Q materialized) and the rotation count."""
    M = np.ascontiguousarray(M, dtype=np.complex128)
    n = M.shape[0]
    if np.any(np.tril(M, -2)):
        raise ValueError("matrix is not upper Hessenberg")
    Rb, c, s = H.hess_qr(M)
    R = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        R[i, i:] = Rb[i, : n - i]
    return QRPFactors(_rotations_to_q(c, s, n), R, np.arange(n), at_reversal, (c, s)), c.shape[0]


def _band_of(R: np.ndarray) -> np.ndarray:
    n = R.shape[0]
    Rb = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        Rb[i, : n - i] = R[i, i:]
    return Rb


def eigenvectors_hessenberg(f: QRPFactors, j_min: int | None = None):
    """Right and left null vectors from factors whose ``|r_jj|`` is smallest at ``j_min``.

    Falls back to inverse iteration when a triangular split solve is not finite.
    """
    R = f.r
    if j_min is None:
        j_min = int(np.argmin(np.abs(np.diag(R))))
    Rb = _band_of(R)
    if f.rotations is None:
        raise ValueError("factors carry no rotation sequence; use hessenberg_qr")
    c, s = f.rotations
    x, y, yh, ok = H.struct_vectors(Rb, c, s, int(j_min))
    if not ok:
        n = R.shape[0]
        x, y, _ = H.struct_inverse_iteration(
            Rb, c, s, np.ones(n, dtype=np.complex128), np.ones(n, dtype=np.complex128)
        )
    return x, y


def solve_structured(
    P: MatrixPolynomial,
    max_iter: int = MAX_ITER,
    seed: int | None = None,
    estimates: EstimateSet | None = None,
    info: list | None = None,
) -> list[EigenResult]:
    """All ``n*d`` eigenvalues of a Hessenberg or tridiagonal ``P``.

    Same output contract as :func:`laguerre_pep.dense.solve_dense`.
    """
    _require_structured(P)
    seed = default_seed(seed)
    est = initial_estimates(P, seed=seed) if estimates is None else estimates
    results = null_results(P, est)
    n, d = P.n, P.d
    tri = P.structure is Structure.TRIDIAGONAL
    w = coefficient_weights(P)
    lams, status, iters, X, Y, berr, cond, rel, used_rev, nonfinite = H.struct_run(
        P.coeffs, P.bands, tri, w.norms, est.finite_estimates, est.zero_multiplicity,
        n * d - est.infinite_multiplicity, int(max_iter), probe_vector(n, seed), unit_kicks(seed),
    )
    for k in range(lams.shape[0]):
        results.append(
            EigenResult(
                Kind.FINITE, complex(lams[k]), X[k], Y[k], float(berr[k, 0]),
                float(cond[k]), StopStatus(int(status[k])), int(iters[k]),
                float(berr[k, 1]), bool(rel[k]), abs(lams[k]) > 1.0,
            )
        )
    if info is not None:
        info.append(RunInfo(bool(nonfinite), int(used_rev.sum())))
    return results
