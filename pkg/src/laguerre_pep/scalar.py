"""Laguerre root finder for scalar polynomials with sequential deflation.

Initial estimates come from the Newton polygon of ``log|a_i|``. When an
iterate leaves the unit disc the polynomial is evaluated through its
reversal so the Horner sums stay bounded.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numba import njit

from .core import EPS, ScalarPolynomial, scalar_horner3, weight_sum
from .status import StopStatus

PHASE_OFFSET = 0.7
MAX_ITER = 60
# relative step size below which a non-shrinking step is taken as rounding noise
PLATEAU = 1e-6


@dataclass(frozen=True)
class NewtonPolygon:
    vertex_abscissas: np.ndarray
    radii: np.ndarray

    @property
    def zero_multiplicity(self) -> int:
        return int(self.vertex_abscissas[0])

    @property
    def degree(self) -> int:
        return int(self.vertex_abscissas[-1])


@njit(cache=True)
def _upper_hull(x, y):
    """Monotone-chain upper hull; collinear middle points are dropped."""
    hull = np.empty(x.shape[0], dtype=np.int64)
    top = 0
    for p in range(x.shape[0]):
        while top >= 2:
            o = hull[top - 2]
            a = hull[top - 1]
            cross = (x[a] - x[o]) * (y[p] - y[o]) - (y[a] - y[o]) * (x[p] - x[o])
            if cross >= 0:
                top -= 1
            else:
                break
        hull[top] = p
        top += 1
    return hull[:top]


def newton_polygon(w: ScalarPolynomial) -> NewtonPolygon:
    """Upper convex hull of ``(i, log|a_i|)`` over the nonzero coefficients.

    A polynomial whose only nonzero coefficient is the leading one gives a
    single vertex and no radii; the caller reports its zero root.
    """
    if not isinstance(w, ScalarPolynomial):
        w = ScalarPolynomial(w)
    if w.d == 0:
        raise ValueError("a constant polynomial has no roots")
    idx = np.flatnonzero(w.coeffs)
    logs = np.log(np.abs(w.coeffs[idx]))
    hull = _upper_hull(idx.astype(np.float64), logs)
    k = idx[hull]
    lg = logs[hull]
    radii = np.exp((lg[:-1] - lg[1:]) / np.diff(k))
    return NewtonPolygon(k.astype(np.int64), radii)


def initial_estimates_scalar(polygon: NewtonPolygon, d: int) -> np.ndarray:
    """Points on the hull circles, ``k_i - k_{i-1}`` of them at radius ``r_i``."""
    k = polygon.vertex_abscissas
    if int(k[-1]) != d:
        raise ValueError(f"polygon ends at abscissa {k[-1]}, expected degree {d}")
    m = np.diff(k)
    if m.size == 0:
        return np.zeros(0, dtype=np.complex128)
    # position of each point within its segment
    j = np.arange(int(m.sum())) - np.repeat(np.cumsum(m) - m, m)
    theta = 2.0 * np.pi * j / np.repeat(m, m) + PHASE_OFFSET
    return np.repeat(polygon.radii, m) * np.exp(1j * theta)


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def laguerre_update(lam, s1, s2, N):
    """Laguerre iterate from the (deflated) sums; ``ok`` is False on a zero denominator."""
    if N <= 1:
        denom = s1
    else:
        disc = cmath.sqrt((N - 1) * (N * s2 - s1 * s1))
        dp = s1 + disc
        dm = s1 - disc
        denom = dp if abs(dp) >= abs(dm) else dm
    if denom == 0 or not (np.isfinite(denom.real) and np.isfinite(denom.imag)):
        return lam, False
    return lam - N / denom, True


@njit(cache=True)
def stagnated(step, prev_step, lam):
    """Step below eps*|lam|, or a tiny step that no longer shrinks (roundoff plateau)."""
    scale = abs(lam)
    if step < EPS * scale:
        return True
    return step >= prev_step and step < PLATEAU * scale


@njit(cache=True)
def scalar_sums(a, absa, lam):
    """w-value, S1 = w'/w, S2 = -(w'/w)' and the residual scale at lam.

    Returns ``(value, s1, s2, residual, scale)``; for ``|lam| > 1`` value and
    residual refer to the reversal at 1/lam and s1, s2 are mapped back.
    """
    d = a.shape[0] - 1
    if abs(lam) <= 1.0:
        v, d1, d2 = scalar_horner3(a, lam, False)
        scale = weight_sum(absa, abs(lam), False)
        if v == 0:
            return v, 0j, 0j, 0.0, scale
        g = d1 / v
        return v, g, g * g - d2 / v, abs(v), scale
    rho = 1.0 / lam
    v, d1, d2 = scalar_horner3(a, rho, True)
    scale = weight_sum(absa, abs(rho), True)
    if v == 0:
        return v, 0j, 0j, 0.0, scale
    g = d1 / v
    s1 = rho * (d - rho * g)
    s2 = rho * rho * (d - 2.0 * rho * g + rho * rho * (g * g - d2 / v))
    return v, s1, s2, abs(v), scale


@njit(cache=True)
def _finite(z):
    return np.isfinite(z.real) and np.isfinite(z.imag)


@njit(cache=True)
def _solve_kernel(a, est, max_iter, kicks):
    m = a.shape[0] - 1
    absa = np.abs(a)
    roots = np.zeros(m, dtype=np.complex128)
    iters = np.zeros(m, dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)
    nonfinite = False
    nk = kicks.shape[0]
    kick = 0
    for k in range(m):
        lam = est[k]
        it = 0
        st = 4
        prev_step = np.inf
        while True:
            v, s1, s2, resid, scale = scalar_sums(a, absa, lam)
            if not (_finite(v) and _finite(s1) and _finite(s2) and np.isfinite(scale)):
                nonfinite = True
            if resid <= EPS * scale:
                st = 1
                break
            if it >= max_iter:
                st = 4
                break
            collided = False
            for j in range(k):
                t = lam - roots[j]
                if t == 0:
                    collided = True
                    break
                inv = 1.0 / t
                s1 -= inv
                s2 -= inv * inv
            it += 1
            if collided:
                lam = lam + kicks[kick % nk] * EPS * max(1.0, abs(lam))
                kick += 1
                continue
            lam_hat, ok = laguerre_update(lam, s1, s2, m - k)
            if not ok:
                lam = lam + kicks[kick % nk] * EPS * max(1.0, abs(lam))
                kick += 1
                continue
            if not _finite(lam_hat):
                nonfinite = True
            step = abs(lam_hat - lam)
            if stagnated(step, prev_step, lam):
                st = 3
                break
            prev_step = step
            lam = lam_hat
        roots[k] = lam
        iters[k] = it
        status[k] = st
    return roots, iters, status, nonfinite


@njit(cache=True)
def root_errors(a, roots):
    """Backward error, condition number and reliability flag for each root.

    Eigenvectors are the scalar 1, so these are the 1x1 cases of the matrix
    formulas; zero roots get condition 1.
    """
    m = roots.shape[0]
    absa = np.abs(a)
    d = a.shape[0] - 1
    berr = np.zeros(m)
    cond = np.ones(m)
    reliable = np.ones(m, dtype=np.bool_)
    for k in range(m):
        lam = roots[k]
        if lam == 0:
            berr[k] = abs(a[0]) / absa[0] if absa[0] > 0 else 0.0
            continue
        if abs(lam) <= 1.0:
            v, d1, _ = scalar_horner3(a, lam, False)
            alpha = weight_sum(absa, abs(lam), False)
            den = abs(lam) * abs(d1)
        else:
            rho = 1.0 / lam
            v, d1, _ = scalar_horner3(a, rho, True)
            alpha = weight_sum(absa, abs(rho), True)
            den = abs(d * v - rho * d1)
        berr[k] = abs(v) / alpha
        reliable[k] = den >= EPS * alpha * (abs(lam) if abs(lam) <= 1.0 else 1.0)
        cond[k] = alpha / den if den > 0 else np.inf
    return berr, cond, reliable


@lru_cache(maxsize=64)
def unit_kicks(seed: int, count: int = 16) -> np.ndarray:
    """Deterministic unit-modulus complex numbers used to nudge stuck iterates."""
    rng = np.random.default_rng(seed)
    kicks = np.exp(2j * np.pi * rng.random(count))
    kicks.flags.writeable = False
    return kicks


# ---------------------------------------------------------------- public API


def laguerre_step_scalar(w, lam: complex, deflated=(), N: int | None = None) -> complex:
    """One Laguerre update of ``lam`` for ``w`` with the given roots deflated.

    ``N`` defaults to the number of roots still to be found. Raises
    ``ZeroDivisionError`` when the denominator vanishes; the caller is
    expected to perturb ``lam`` and try again.
    """
    if not isinstance(w, ScalarPolynomial):
        w = ScalarPolynomial(w)
    deflated = np.asarray(deflated, dtype=np.complex128).ravel()
    if N is None:
        N = w.d - deflated.size
    if N < 1:
        raise ValueError("no roots left to find")
    lam = complex(lam)
    v, s1, s2, _, _ = scalar_sums(w.coeffs, np.abs(w.coeffs), lam)
    if v == 0:
        return lam
    t = lam - deflated
    if np.any(t == 0):
        raise ZeroDivisionError("iterate coincides with a deflated root")
    s1 -= np.sum(1.0 / t)
    s2 -= np.sum(1.0 / t**2)
    lam_hat, ok = laguerre_update(lam, s1, s2, N)
    if not ok:
        raise ZeroDivisionError("Laguerre denominator vanished")
    return complex(lam_hat)


class ScalarRoots(NamedTuple):
    roots: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    status: np.ndarray
    nonfinite: bool = False


def solve_scalar(w, max_iter: int = MAX_ITER, seed: int = 0) -> ScalarRoots:
    """All ``d`` roots of ``w``, found one at a time with deflation.

    Zero roots (leading zero coefficients) are emitted first with zero
    iterations. A root that hits ``max_iter`` keeps its last iterate and is
    flagged as not converged.
    """
    if not isinstance(w, ScalarPolynomial):
        w = ScalarPolynomial(w)
    if w.d < 1:
        raise ValueError("a constant polynomial has no roots")
    polygon = newton_polygon(w)
    k0 = polygon.zero_multiplicity
    reduced = np.ascontiguousarray(w.coeffs[k0:])
    est = initial_estimates_scalar(polygon, w.d)
    if reduced.size > 1:
        roots, iters, status, nonfinite = _solve_kernel(
            reduced, est, int(max_iter), unit_kicks(seed)
        )
    else:
        roots = np.zeros(0, dtype=np.complex128)
        iters = np.zeros(0, dtype=np.int64)
        status = np.zeros(0, dtype=np.int64)
        nonfinite = False
    roots = np.concatenate([np.zeros(k0, dtype=np.complex128), roots])
    iters = np.concatenate([np.zeros(k0, dtype=np.int64), iters])
    status = np.concatenate([np.full(k0, int(StopStatus.CRITERION1)), status])
    converged = status != int(StopStatus.MAX_ITER)
    return ScalarRoots(roots, iters, converged, status, bool(nonfinite))
