"""Backward errors and condition numbers of computed eigenpairs.

All weights are Frobenius norms of the coefficients, so the reported
backward error is an upper bound on the 2-norm one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    EPS,
    CoefficientWeights,
    MatrixPolynomial,
    coefficient_weights,
    eval_reversal,
    eval_with_derivatives,
)
from .status import Kind


@dataclass(frozen=True)
class ErrorReport:
    eta_right: float
    eta_left: float
    kappa: float
    kappa_reliable: bool = True


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def vnorm(v):
    """2-norm scaled by the largest component, safe from over- and underflow."""
    big = 0.0
    for i in range(v.shape[0]):
        big = max(big, abs(v[i]))
    if big == 0.0 or not np.isfinite(big):
        return big
    s = 0.0
    for i in range(v.shape[0]):
        t = v[i] / big
        s += t.real * t.real + t.imag * t.imag
    return big * np.sqrt(s)


@njit(cache=True)
def residual_ratios(M, x, y, weight):
    """||M x|| / (weight ||x||) and ||y^* M|| / (weight ||y||)."""
    n = M.shape[0]
    rx = np.zeros(n, dtype=np.complex128)
    ry = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            rx[i] += M[i, j] * x[j]
            ry[j] += np.conj(y[i]) * M[i, j]
    nr = vnorm(rx)
    nl = vnorm(ry)
    den_r = weight * vnorm(x)
    den_l = weight * vnorm(y)
    er = 0.0 if nr == 0 else nr / den_r
    el = 0.0 if nl == 0 else nl / den_l
    return er, el


@njit(cache=True)
def bilinear(y, A, x):
    s = 0j
    for i in range(A.shape[0]):
        t = 0j
        for j in range(A.shape[1]):
            t += A[i, j] * x[j]
        s += np.conj(y[i]) * t
    return s


@njit(cache=True)
def finite_condition(M, M1, lam, x, y, weight, d, rev):
    """Condition number of a finite nonzero eigenvalue and a reliability flag.

    ``M, M1`` are P(lam), P'(lam) or, when ``rev``, rP(rho), rP'(rho) with
    rho = 1/lam and ``weight`` the matching alpha.
    """
    num = weight * vnorm(x) * vnorm(y)
    if rev:
        rho = 1.0 / lam
        den = abs(d * bilinear(y, M, x) - rho * bilinear(y, M1, x))
    else:
        den = abs(bilinear(y, M1, x))
    reliable = den >= EPS * num
    den_full = den if rev else abs(lam) * den
    if den_full == 0:
        return np.inf, False
    return num / den_full, reliable


@njit(cache=True)
def null_condition(x, y):
    """||x|| ||y|| / |y^* x| for zero and infinite eigenvalues."""
    s = 0j
    for i in range(x.shape[0]):
        s += np.conj(y[i]) * x[i]
    if s == 0:
        return np.inf
    return vnorm(x) * vnorm(y) / abs(s)


# ---------------------------------------------------------------- public API


def _weights(P, weights):
    return coefficient_weights(P) if weights is None else weights


def _vectors(x, y):
    x = np.ascontiguousarray(x, dtype=np.complex128).ravel()
    y = np.ascontiguousarray(y, dtype=np.complex128).ravel()
    if not np.any(x) or not np.any(y):
        raise ValueError("eigenvectors must be nonzero")
    return x, y


def _at(P: MatrixPolynomial, lam: complex, w: CoefficientWeights):
    if lam is None or np.isinf(abs(lam)):
        return P.coeffs[-1], None, w.norms[-1], True
    if abs(lam) <= 1.0:
        t = eval_with_derivatives(P, lam)
        return t.value, t.deriv1, w.alpha(lam), False
    t = eval_reversal(P, 1.0 / lam)
    return t.value, t.deriv1, w.alpha_rev(1.0 / lam), True


def backward_error(P: MatrixPolynomial, lam, x, y, weights: CoefficientWeights | None = None):
    """Normwise backward errors ``(eta_right, eta_left)`` of the eigentriple.

    Uses ``||P(lam) x|| / (alpha ||x||)`` for ``|lam| <= 1`` and the reversal
    form ``||rP(1/lam) x|| / (r-alpha ||x||)`` otherwise. ``lam = inf`` gives
    the residual against ``A_d``.
    """
    w = _weights(P, weights)
    x, y = _vectors(x, y)
    M, _, weight, _ = _at(P, lam, w)
    if weight == 0:
        return 0.0, 0.0
    er, el = residual_ratios(np.ascontiguousarray(M), x, y, weight)
    return float(er), float(el)


def condition_number(
    P: MatrixPolynomial,
    lam,
    x,
    y,
    weights: CoefficientWeights | None = None,
    kind: Kind | str = Kind.FINITE,
) -> tuple[float, bool]:
    """Eigenvalue condition number and whether it can be trusted.

    Zero and infinite eigenvalues get ``||x|| ||y|| / |y^* x|``. A finite
    eigenvalue whose ``|y^* P'(lam) x|`` falls below ``eps * alpha ||x|| ||y||``
    (typically a multiple eigenvalue) is flagged unreliable.
    """
    kind = Kind(kind)
    x, y = _vectors(x, y)
    if kind is not Kind.FINITE:
        return float(null_condition(x, y)), True
    w = _weights(P, weights)
    M, M1, weight, rev = _at(P, lam, w)
    k, ok = finite_condition(
        np.ascontiguousarray(M), np.ascontiguousarray(M1), complex(lam), x, y, weight, P.d, rev
    )
    return float(k), bool(ok)


def error_report(P, lam, x, y, weights=None, kind=Kind.FINITE) -> ErrorReport:
    er, el = backward_error(P, lam, x, y, weights)
    k, ok = condition_number(P, lam, x, y, weights, kind)
    return ErrorReport(er, el, k, ok)
