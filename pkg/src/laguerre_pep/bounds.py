"""Outer Pellet bounds on eigenvalue moduli.

For ``k = d`` the equation ``c_d mu**d = sum_{i<d} w_i mu**i`` has one positive
root R and no eigenvalue is larger in modulus; for ``k = 0`` the root r of
``c_0 = sum_{i>0} w_i mu**i`` bounds the moduli from below. ``c_k`` stands
for ``||A_k^{-1}||^{-1}``, the smallest singular value of ``A_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .core import EPS, MatrixPolynomial, coefficient_weights


@dataclass(frozen=True)
class PelletBounds:
    lower: float
    upper: float

    def contains(self, z, rtol: float = 1e-8) -> np.ndarray:
        r = np.abs(np.asarray(z))
        return (r >= self.lower * (1 - rtol)) & (r <= self.upper * (1 + rtol))


def _outer_root(weights: np.ndarray, ck: float, k: int) -> float:
    d = weights.shape[0] - 1
    others = [i for i in range(d + 1) if i != k and weights[i] > 0]
    if not others:
        # only A_k is nonzero: every eigenvalue sits at 0 (k = d) or at infinity (k = 0)
        return 0.0 if k == d else math.inf
    logw = np.log(weights[others])
    shift = np.array(others, dtype=np.float64) - k
    logc = math.log(ck)

    def h(t):
        return logsumexp(logw + shift * t) - logc

    # h is monotone in t: decreasing for k = d, increasing for k = 0
    sign = -1.0 if k == d else 1.0
    lo, hi = -1.0, 1.0
    while sign * h(lo) > 0:
        lo *= 2.0
    while sign * h(hi) < 0:
        hi *= 2.0
    t = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(t)


def pellet_bounds(weights, c0: float | None = None, cd: float | None = None) -> PelletBounds:
    """Lower and upper Pellet radii from coefficient weights.

    Parameters
    ----------
    weights : array of d+1 nonnegative reals, e.g. ``||A_i||_F``.
    c0, cd : ``||A_0^{-1}||^{-1}`` and ``||A_d^{-1}||^{-1}``; zero marks a
        singular end coefficient. Defaults to ``weights[0]`` and
        ``weights[d]``, which is exact for scalar polynomials.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size < 2:
        raise ValueError("need at least two weights (degree >= 1)")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise ValueError("all coefficient weights are zero")
    d = w.size - 1
    c0 = w[0] if c0 is None else float(c0)
    cd = w[d] if cd is None else float(cd)
    lower = _outer_root(w, c0, 0) if c0 > 0 else 0.0
    upper = _outer_root(w, cd, d) if cd > 0 else math.inf
    return PelletBounds(lower, upper)


def smallest_singular_value(A: np.ndarray) -> float:
    """sigma_min(A), reported as 0 when below the rank tolerance n*eps*||A||_F."""
    s = np.linalg.svd(A, compute_uv=False)
    smin = float(s[-1])
    if smin <= A.shape[0] * EPS * float(np.linalg.norm(A)):
        return 0.0
    return smin


def pellet_bounds_for(P: MatrixPolynomial) -> PelletBounds:
    w = coefficient_weights(P).norms
    return pellet_bounds(
        w,
        smallest_singular_value(P.coeffs[0]),
        smallest_singular_value(P.coeffs[-1]),
    )
