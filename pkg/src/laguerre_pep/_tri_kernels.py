"""Numba kernels for banded (tridiagonal) storage and Givens rotations.

Band layout: ``B[0, k] = A[k+1, k]``, ``B[1, k] = A[k, k]``, ``B[2, k] = A[k, k+1]``.
A rotation ``(c, s)`` acting on rows (k, k+1) maps ``(a, b)`` to
``(c a + s b, -conj(s) a + c b)`` with real ``c``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def givens(a, b):
    """(c, s, r) with c real so that [c s; -conj(s) c] [a; b] = [r; 0]."""
    if b == 0:
        return 1.0, 0j, a
    if a == 0:
        return 0.0, np.conj(b) / abs(b), abs(b) + 0j
    na = abs(a)
    nrm = np.hypot(na, abs(b))
    c = na / nrm
    ph = a / na
    s = ph * np.conj(b) / nrm
    return c, s, ph * nrm


@njit(cache=True)
def band_horner3(bands, lam, reverse):
    d = bands.shape[0] - 1
    n = bands.shape[2]
    top = 0 if reverse else d
    v = bands[top].copy()
    d1 = np.zeros((3, n), dtype=np.complex128)
    d2 = np.zeros((3, n), dtype=np.complex128)
    for step in range(d - 1, -1, -1):
        k = d - step if reverse else step
        for r in range(3):
            for j in range(n):
                d2[r, j] = d2[r, j] * lam + 2.0 * d1[r, j]
                d1[r, j] = d1[r, j] * lam + v[r, j]
                v[r, j] = v[r, j] * lam + bands[k, r, j]
    return v, d1, d2


@njit(cache=True)
def band_matvec(B, x):
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        s = B[1, i] * x[i]
        if i > 0:
            s += B[0, i - 1] * x[i - 1]
        if i < n - 1:
            s += B[2, i] * x[i + 1]
        out[i] = s
    return out


@njit(cache=True)
def band_rmatvec(B, y):
    """y^* A as a vector (row-vector entries)."""
    n = y.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for j in range(n):
        s = np.conj(y[j]) * B[1, j]
        if j > 0:
            s += np.conj(y[j - 1]) * B[2, j - 1]
        if j < n - 1:
            s += np.conj(y[j + 1]) * B[0, j]
        out[j] = s
    return out


@njit(cache=True)
def tri_qr(B):
    """Givens QR of a tridiagonal matrix without pivoting.

    Returns ``R`` as an (n, 3) band (``R[i, t] = r_{i, i+t}``) and the
    rotations ``c[k], s[k]`` that acted on rows (k, k+1), k = 0..n-2.
    """
    n = B.shape[1]
    R = np.zeros((n, 3), dtype=np.complex128)
    for i in range(n):
        R[i, 0] = B[1, i]
        if i < n - 1:
            R[i, 1] = B[2, i]
    c = np.ones(max(n - 1, 0))
    s = np.zeros(max(n - 1, 0), dtype=np.complex128)
    for k in range(n - 1):
        # rows k (band offset from k) and k+1 (offsets from k+1); sub entry B[0,k]
        a = R[k, 0]
        b = B[0, k]
        ck, sk, r = givens(a, b)
        c[k] = ck
        s[k] = sk
        # row k: cols k, k+1, k+2 ; row k+1: cols k (=b), k+1 (R[k+1,0]), k+2 (R[k+1,1])
        rk1 = R[k, 1]
        rk2 = R[k, 2]
        q1 = R[k + 1, 0]
        q2 = R[k + 1, 1]
        R[k, 0] = r
        R[k, 1] = ck * rk1 + sk * q1
        R[k, 2] = ck * rk2 + sk * q2
        R[k + 1, 0] = -np.conj(sk) * rk1 + ck * q1
        R[k + 1, 1] = -np.conj(sk) * rk2 + ck * q2
    return R, c, s


@njit(cache=True)
def apply_qh(c, s, b):
    """Q^* b where Q^* = G_{n-2} ... G_0."""
    z = b.copy()
    for k in range(c.shape[0]):
        u = z[k]
        v = z[k + 1]
        z[k] = c[k] * u + s[k] * v
        z[k + 1] = -np.conj(s[k]) * u + c[k] * v
    return z


@njit(cache=True)
def apply_q(c, s, b):
    """Q b = G_0^* ... G_{n-2}^* b."""
    z = b.copy()
    for k in range(c.shape[0] - 1, -1, -1):
        u = z[k]
        v = z[k + 1]
        z[k] = c[k] * u - s[k] * v
        z[k + 1] = np.conj(s[k]) * u + c[k] * v
    return z


@njit(cache=True)
def q_column(c, s, j, n):
    """Q e_j in O(j) work; entries beyond j+1 are zero."""
    z = np.zeros(n, dtype=np.complex128)
    z[j] = 1.0
    top = min(j, c.shape[0] - 1)
    for k in range(top, -1, -1):
        u = z[k]
        v = z[k + 1]
        z[k] = c[k] * u - s[k] * v
        z[k + 1] = np.conj(s[k]) * u + c[k] * v
    return z


@njit(cache=True)
def band_solve_upper(R, b):
    """R z = b for an (n, w) upper band R (R[i, t] = r_{i, i+t})."""
    n = R.shape[0]
    w = R.shape[1]
    z = b.copy()
    for i in range(n - 1, -1, -1):
        acc = z[i]
        for t in range(1, w):
            if i + t < n:
                acc -= R[i, t] * z[i + t]
        z[i] = acc / R[i, 0]
    return z


@njit(cache=True)
def band_solve_upper_h(R, b):
    """R^* z = b for an (n, w) upper band R."""
    n = R.shape[0]
    w = R.shape[1]
    z = b.copy()
    for i in range(n):
        acc = z[i]
        for t in range(1, w):
            if i - t >= 0:
                acc -= np.conj(R[i - t, t]) * z[i - t]
        z[i] = acc / np.conj(R[i, 0])
    return z
