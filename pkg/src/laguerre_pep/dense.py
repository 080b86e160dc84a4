"""Laguerre iteration for general matrix polynomials.

Each iterate factors P(lam) (or the reversal at 1/lam when |lam| > 1) by
Householder QR with column pivoting. The factors give the trace corrections,
the stopping tests and, once an eigenvalue has converged, both eigenvectors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _dense_kernels as K
from .core import (
    EPS,
    CoefficientWeights,
    MatrixPolynomial,
    coefficient_weights,
    eval_reversal,
    eval_with_derivatives,
)
from .metrics import null_condition, residual_ratios
from .prep import EstimateSet, initial_estimates
from .scalar import MAX_ITER, unit_kicks
from .status import Kind, StopStatus


@dataclass(frozen=True, eq=False)
class QRPFactors:
    """``q @ r == M[:, perm]`` for M = P(lam), or rP(1/lam) when ``at_reversal``."""

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray
    at_reversal: bool = False
    rotations: tuple | None = None  # (c, s) when Q is a Givens sequence


@dataclass
class IterationState:
    lam: complex
    iter: int = 0
    deflation_set: list = field(default_factory=list)
    n_zero_deflated: int = 0
    n1: int = 0

    @property
    def remaining(self) -> int:
        return self.n1 - self.n_zero_deflated - len(self.deflation_set)


@dataclass(frozen=True, eq=False)
class EigenResult:
    kind: Kind
    lam: complex | None
    x: np.ndarray
    y: np.ndarray
    berr: float
    cond: float
    status: StopStatus
    iterations: int = 0
    berr_left: float = 0.0
    cond_reliable: bool = True
    at_reversal: bool = False

    @property
    def eigenvalue(self) -> complex:
        if self.kind is Kind.ZERO:
            return 0j
        if self.kind is Kind.INFINITE:
            return complex(np.inf, 0)
        return self.lam

    @property
    def converged(self) -> bool:
        return self.status is not StopStatus.MAX_ITER


def default_seed(seed: int | None = None) -> int:
    """``seed`` if given, else ``$POLYEIG_SEED``, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("POLYEIG_SEED", "").strip()
    return int(env) if env else 0


def probe_vector(n: int, seed: int) -> np.ndarray:
    """Fixed pseudorandom unit vector used as one of the criterion-2 probes."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- single ops


def qr_col_pivot(M: np.ndarray, at_reversal: bool = False) -> QRPFactors:
    Q, R, perm = K.qrp(np.ascontiguousarray(M, dtype=np.complex128))
    return QRPFactors(Q, R, perm, at_reversal)


def _triple(P: MatrixPolynomial, lam: complex):
    if abs(lam) > 1.0:
        return eval_reversal(P, 1.0 / lam), True
    return eval_with_derivatives(P, lam), False


def factor_at(P: MatrixPolynomial, lam: complex) -> QRPFactors:
    """Factor P(lam), or rP(1/lam) when |lam| > 1."""
    t, rev = _triple(P, complex(lam))
    return qr_col_pivot(t.value, rev)


def laguerre_correction_dense(P: MatrixPolynomial, lam: complex, f: QRPFactors):
    """``(s1, s2) = (p'/p, -(p'/p)')`` at ``lam`` with p = det P, no deflation."""
    lam = complex(lam)
    t, rev = _triple(P, lam)
    if rev != f.at_reversal:
        raise ValueError("factors do not match the evaluation branch for this lam")
    if np.any(np.diag(f.r) == 0):
        raise ZeroDivisionError("R is exactly singular; lam is an eigenvalue")
    tr1, tr2 = K.dense_sums(f.q, f.r, f.perm, t.deriv1, t.deriv2)
    s1, s2 = K.lambda_sums(tr1, tr2, lam, rev, P.n * P.d)
    return complex(s1), complex(s2)


def check_stop(
    P: MatrixPolynomial,
    lam: complex,
    f: QRPFactors,
    weights: CoefficientWeights | None = None,
    seed: int = 0,
) -> StopStatus | None:
    """Criterion 1 or 2 if either fires at the current factorization, else None.

    The step-size test needs the next iterate and lives in the driver.
    """
    w = coefficient_weights(P) if weights is None else weights
    alpha = w.at(complex(lam))
    n = P.n
    if abs(f.r[n - 1, n - 1]) < alpha * EPS:
        return StopStatus.CRITERION1
    b = np.empty((3, n), dtype=np.complex128)
    b[0] = 1 / np.sqrt(n)
    b[1] = probe_vector(n, seed)
    b[2] = f.q[:, n - 1]
    if K.crit2_ratio(f.q, f.r, f.perm, b, alpha) < EPS:
        return StopStatus.CRITERION2
    return None


def singular_vectors(f: QRPFactors, x0=None, y0=None, with_flag: bool = False):
    """Right and left singular vectors for the smallest singular value of the
    factored matrix, by inverse iteration through the factors."""
    if x0 is None or y0 is None:
        gx, gy, _ = K.vectors_from_factors(f.q, f.r, f.perm)
        x0 = gx if x0 is None else x0
        y0 = gy if y0 is None else y0
    x, y, ok = K.inverse_iteration(
        f.q, f.r, f.perm, np.asarray(x0, np.complex128), np.asarray(y0, np.complex128)
    )
    return (x, y, bool(ok)) if with_flag else (x, y)


def eigenvectors_from_factors(f: QRPFactors):
    """Null vectors read off a factorization whose last pivot is negligible."""
    x, y, ok = K.vectors_from_factors(f.q, f.r, f.perm)
    if not ok:
        return singular_vectors(f, x, y)
    return x, y


# ---------------------------------------------------------------- driver


def null_results(P: MatrixPolynomial, est: EstimateSet) -> list[EigenResult]:
    """Zero and infinite eigenvalues detected from the end coefficients."""
    out = []
    for kind, k, X, Y, A in (
        (Kind.ZERO, est.zero_multiplicity, est.zero_right, est.zero_left, P.coeffs[0]),
        (Kind.INFINITE, est.infinite_multiplicity, est.infinite_right, est.infinite_left, P.coeffs[-1]),
    ):
        nrm = float(np.linalg.norm(A))
        for j in range(k):
            x = np.ascontiguousarray(X[:, j])
            y = np.ascontiguousarray(Y[:, j])
            er, el = residual_ratios(A, x, y, nrm)
            out.append(
                EigenResult(
                    kind, None, x, y, float(er), float(null_condition(x, y)),
                    StopStatus.CRITERION1, 0, float(el), True, kind is Kind.INFINITE,
                )
            )
    return out


@dataclass(frozen=True)
class RunInfo:
    """Diagnostics of a solve: whether a non-finite iterate ever appeared and
    how many eigenvalues went through the reversal branch."""

    nonfinite: bool
    reversal_count: int


def solve_dense(
    P: MatrixPolynomial,
    max_iter: int = MAX_ITER,
    seed: int | None = None,
    estimates: EstimateSet | None = None,
    info: list | None = None,
) -> list[EigenResult]:
    """All ``n*d`` eigenvalues of ``P`` with eigenvectors, backward errors and
    condition numbers. Zero and infinite eigenvalues come first.

    ``info``, if a list, receives a :class:`RunInfo`.
    """
    seed = default_seed(seed)
    est = initial_estimates(P, seed=seed) if estimates is None else estimates
    results = null_results(P, est)
    n, d = P.n, P.d
    n1 = n * d - est.infinite_multiplicity
    w = coefficient_weights(P)
    lams, status, iters, X, Y, berr, cond, rel, used_rev, nonfinite = K.dense_run(
        P.coeffs, w.norms, est.finite_estimates, est.zero_multiplicity, n1,
        int(max_iter), probe_vector(n, seed), unit_kicks(seed), True,
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
