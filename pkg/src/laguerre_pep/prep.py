"""A priori zero/infinite eigenvalue detection and numerical-range estimates.

Zero and infinite eigenvalues are read off the null spaces of ``A_0`` and
``A_d`` (assumed semi-simple, so geometric multiplicity stands in for
algebraic). The remaining finite eigenvalues get initial estimates from the
roots of the quadratic forms ``q_j^* P(lam) q_j`` built from the columns of
the orthogonal factor of ``A_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import solve_triangular

from ._dense_kernels import qrp
from ._tri_kernels import givens, q_column, tri_qr
from .bounds import PelletBounds, pellet_bounds, smallest_singular_value
from .core import EPS, MatrixPolynomial, NonRegularError, Structure, coefficient_weights
from .scalar import MAX_ITER, solve_scalar


@dataclass(frozen=True)
class RankReveal:
    rank: int
    right_null: np.ndarray
    left_null: np.ndarray
    q_columns: np.ndarray

    @property
    def nullity(self) -> int:
        return self.right_null.shape[1]


@dataclass(frozen=True)
class EstimateSet:
    zero_multiplicity: int
    zero_right: np.ndarray
    zero_left: np.ndarray
    infinite_multiplicity: int
    infinite_right: np.ndarray
    infinite_left: np.ndarray
    finite_estimates: np.ndarray
    bounds: PelletBounds
    forms: np.ndarray = field(repr=False)


def _threshold(A: np.ndarray, tol: float | None) -> float:
    rel = A.shape[0] * EPS if tol is None else float(tol)
    if rel <= 0:
        raise ValueError("rank tolerance must be positive")
    return rel * float(np.linalg.norm(A))


def rank_reveal(A: np.ndarray, tol: float | None = None) -> RankReveal:
    """Numerical rank and null bases of ``A`` from a column-pivoted QR.

    ``tol`` is relative to ``||A||_F`` and defaults to ``n * eps``. The right
    null vectors solve ``R11 xhat = -R(1:k, j)`` with a unit entry in slot
    ``j``; the left null vectors are the trailing columns of Q.
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    n = A.shape[0]
    thr = _threshold(A, tol)
    Q, R, perm = qrp(A)
    diag = np.abs(np.diag(R))
    k1 = int(np.count_nonzero(diag > thr))
    k2 = n - k1
    right = np.zeros((n, k2), dtype=np.complex128)
    for col, j in enumerate(range(k1, n)):
        xh = np.zeros(n, dtype=np.complex128)
        xh[j] = 1.0
        if k1:
            xh[:k1] = solve_triangular(R[:k1, :k1], -R[:k1, j])
        x = np.empty(n, dtype=np.complex128)
        x[perm] = xh
        right[:, col] = x / np.linalg.norm(x)
    left = Q[:, k1:].copy()
    return RankReveal(k1, right, left, Q)


@njit(cache=True)
def _staircase(R3, c, s, thr):
    """Reduce the banded R of a tridiagonal QR to row echelon form.

    Rows are scanned top to bottom; entries sitting in a column already owned
    by an earlier pivot are rotated away against that pivot row, then the
    first remaining entry above ``thr`` becomes the row's pivot. Returns the
    reduced dense R, pivot column per row (-1: none), the extra rotations
    (row pairs and coefficients) and the last touched column per row.
    """
    n = R3.shape[0]
    R = np.zeros((n, n), dtype=np.complex128)
    end = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for t in range(3):
            if i + t < n:
                R[i, i + t] = R3[i, t]
        end[i] = min(i + 2, n - 1)
    owner = -np.ones(n, dtype=np.int64)
    pivcol = -np.ones(n, dtype=np.int64)
    cap = 3 * n + 3
    rot_rows = np.zeros((cap, 2), dtype=np.int64)
    rot_c = np.zeros(cap)
    rot_s = np.zeros(cap, dtype=np.complex128)
    nrot = 0
    for i in range(n):
        for col in range(i, end[i] + 1):
            r = owner[col]
            if r < 0 or R[i, col] == 0:
                continue
            cc, ss, rr = givens(R[r, col], R[i, col])
            hi = max(end[r], end[i])
            R[r, col] = rr
            R[i, col] = 0
            for j in range(col + 1, hi + 1):
                u = R[r, j]
                v = R[i, j]
                R[r, j] = cc * u + ss * v
                R[i, j] = -np.conj(ss) * u + cc * v
            end[r] = hi
            end[i] = hi
            rot_rows[nrot, 0] = r
            rot_rows[nrot, 1] = i
            rot_c[nrot] = cc
            rot_s[nrot] = ss
            nrot += 1
        for col in range(i, end[i] + 1):
            if owner[col] < 0 and abs(R[i, col]) > thr:
                owner[col] = i
                pivcol[i] = col
                break
    return R, pivcol, rot_rows[:nrot], rot_c[:nrot], rot_s[:nrot], end


@njit(cache=True)
def _final_q_column(c, s, rot_rows, rot_c, rot_s, j, n):
    """Column j of Q_final = Q H_1^* ... H_m^*."""
    z = np.zeros(n, dtype=np.complex128)
    z[j] = 1.0
    for t in range(rot_c.shape[0] - 1, -1, -1):
        a = rot_rows[t, 0]
        b = rot_rows[t, 1]
        u = z[a]
        v = z[b]
        if u == 0 and v == 0:
            continue
        z[a] = rot_c[t] * u - rot_s[t] * v
        z[b] = np.conj(rot_s[t]) * u + rot_c[t] * v
    # Q z, with Q = G_0^* ... G_{n-2}^*
    for k in range(c.shape[0] - 1, -1, -1):
        u = z[k]
        v = z[k + 1]
        z[k] = c[k] * u - s[k] * v
        z[k + 1] = np.conj(s[k]) * u + c[k] * v
    return z


@njit(cache=True)
def _all_q_columns(c, s, rot_rows, rot_c, rot_s, n):
    Q = np.empty((n, n), dtype=np.complex128)
    if rot_c.shape[0] == 0:
        for j in range(n):
            Q[:, j] = q_column(c, s, j, n)
    else:
        for j in range(n):
            Q[:, j] = _final_q_column(c, s, rot_rows, rot_c, rot_s, j, n)
    return Q


@njit(cache=True)
def _staircase_null(R, pivcol, end, j):
    """Null vector with x[j] = 1 for non-pivot column j, other free columns 0."""
    n = R.shape[0]
    x = np.zeros(n, dtype=np.complex128)
    x[j] = 1.0
    for i in range(n - 1, -1, -1):
        p = pivcol[i]
        if p < 0:
            continue
        acc = 0j
        for col in range(p + 1, end[i] + 1):
            acc += R[i, col] * x[col]
        x[p] = -acc / R[i, p]
    return x


def _as_bands(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    B = np.zeros((3, n), dtype=np.complex128)
    k = np.arange(n - 1)
    B[0, : n - 1] = A[k + 1, k]
    B[1] = np.diag(A)
    B[2, : n - 1] = A[k, k + 1]
    return B


def tridiagonal_pivot_scan(A: np.ndarray, tol: float | None = None) -> RankReveal:
    """Rank reveal for a tridiagonal matrix without column pivoting.

    Plain Givens QR keeps R banded; pivots are then located one row at a
    time, rotating away entries that fall under an earlier pivot.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if np.any(np.tril(A, -2)) or np.any(np.triu(A, 2)):
        raise ValueError("matrix is not tridiagonal")
    B = _as_bands(A)
    n = B.shape[1]
    rel = n * EPS if tol is None else float(tol)
    thr = rel * float(np.sqrt(np.sum(np.abs(B) ** 2)))
    R3, c, s = tri_qr(np.ascontiguousarray(B))
    R, pivcol, rot_rows, rot_c, rot_s, end = _staircase(R3, c, s, thr)
    Q = _all_q_columns(c, s, rot_rows, rot_c, rot_s, n)
    rank = int(np.count_nonzero(pivcol >= 0))
    pivots = set(pivcol[pivcol >= 0].tolist())
    free_cols = [j for j in range(n) if j not in pivots]
    zero_rows = [i for i in range(n) if pivcol[i] < 0]
    right = np.zeros((n, len(free_cols)), dtype=np.complex128)
    for t, j in enumerate(free_cols):
        x = _staircase_null(R, pivcol, end, j)
        right[:, t] = x / np.linalg.norm(x)
    left = Q[:, zero_rows].copy()
    return RankReveal(rank, right, left, Q)


def _reveal(P: MatrixPolynomial, A: np.ndarray, tol):
    if P.structure is Structure.TRIDIAGONAL:
        return tridiagonal_pivot_scan(A, tol)
    return rank_reveal(A, tol)


@njit(cache=True)
def _band_forms(bands, Q):
    """q_j^* A_i q_j for tridiagonal A_i given as bands; O(d n) per column."""
    dp1 = bands.shape[0]
    n = bands.shape[2]
    m = Q.shape[1]
    out = np.zeros((m, dp1), dtype=np.complex128)
    for j in range(m):
        q = Q[:, j]
        for i in range(dp1):
            acc = 0j
            for r in range(n):
                v = bands[i, 1, r] * q[r]
                if r > 0:
                    v += bands[i, 0, r - 1] * q[r - 1]
                if r < n - 1:
                    v += bands[i, 2, r] * q[r + 1]
                acc += np.conj(q[r]) * v
            out[j, i] = acc
    return out


def quadratic_forms(P: MatrixPolynomial, Q: np.ndarray) -> np.ndarray:
    """Coefficients of ``q_j^* P(lam) q_j`` for every column, shape (n, d+1)."""
    if P.structure is Structure.TRIDIAGONAL:
        return _band_forms(P.bands, np.ascontiguousarray(Q))
    return np.einsum("rj,irc,cj->ji", Q.conj(), P.coeffs, Q, optimize=True)


def initial_estimates(
    P: MatrixPolynomial,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
    seed: int = 0,
) -> EstimateSet:
    """Zero/infinite multiplicities with eigenvector bases, plus estimates of
    the finite eigenvalues (exactly ``nd - N0 - Ninf`` of them)."""
    n, d = P.n, P.d
    w = coefficient_weights(P).norms
    A0, Ad = P.coeffs[0], P.coeffs[-1]
    r0 = _reveal(P, A0, tol)
    rd = _reveal(P, Ad, tol)
    n_zero = n - r0.rank
    n_inf = n - rd.rank
    target = n * d - n_zero - n_inf
    if target < 0:
        raise NonRegularError("zero and infinite null spaces exceed n*d; possibly non-regular")

    c0 = smallest_singular_value(A0) if n_zero == 0 else 0.0
    cd = smallest_singular_value(Ad) if n_inf == 0 else 0.0
    bounds = pellet_bounds(w, c0, cd)

    forms = quadratic_forms(P, rd.q_columns)
    lead_small = np.abs(forms[:, d]) < EPS * w[d]
    if np.any(lead_small):
        alt = quadratic_forms(P, r0.q_columns[:, lead_small])
        forms[lead_small] = alt
    negligible = np.abs(forms) <= EPS * w[None, :]
    if np.all(negligible):
        raise NonRegularError("every quadratic form vanishes; possibly non-regular")

    estimates = []
    for j in range(n):
        c = np.where(negligible[j], 0, forms[j])
        nz = np.flatnonzero(c)
        if nz.size == 0 or nz[-1] == 0:
            continue
        estimates.append(solve_scalar(c[: nz[-1] + 1], max_iter=max_iter, seed=seed).roots)
    est = np.concatenate(estimates) if estimates else np.zeros(0, dtype=np.complex128)

    if est.size > target:
        keep = np.argsort(-np.abs(est), kind="stable")[:target]
        est = est[np.sort(keep)]
    elif est.size < target:
        short = target - est.size
        radius = bounds.upper
        if not math.isfinite(radius) or radius <= 0:
            radius = float(np.max(np.abs(est))) if est.size and np.any(est) else 1.0
        theta = 2 * np.pi * np.arange(short) / short + 0.7
        est = np.concatenate([est, radius * np.exp(1j * theta)])

    return EstimateSet(
        n_zero,
        r0.right_null,
        r0.left_null,
        n_inf,
        rd.right_null,
        rd.left_null,
        np.ascontiguousarray(est, dtype=np.complex128),
        bounds,
        forms,
    )
