"""Numba kernels for the Hessenberg and tridiagonal engines.

Both keep Q as a rotation sequence and R in upper band storage
``R[i, t] = r_{i, i+t}`` (width n for Hessenberg, 3 for tridiagonal).
"""

import numpy as np
from numba import njit

from ._dense_kernels import lambda_sums
from ._tri_kernels import (
    apply_q,
    apply_qh,
    band_horner3,
    band_matvec,
    band_rmatvec,
    band_solve_upper,
    band_solve_upper_h,
    givens,
    tri_qr,
)
from .core import EPS, horner3, weight_sum
from .metrics import finite_condition, residual_ratios, vnorm
from .scalar import laguerre_update, stagnated

BIG = 2.0**400
SMALL = 2.0**-400


@njit(cache=True)
def hess_qr(M):
    """Givens QR of an upper Hessenberg matrix: n-1 rotations, banded R."""
    n = M.shape[0]
    A = M.copy()
    c = np.ones(max(n - 1, 0))
    s = np.zeros(max(n - 1, 0), dtype=np.complex128)
    for k in range(n - 1):
        ck, sk, r = givens(A[k, k], A[k + 1, k])
        c[k] = ck
        s[k] = sk
        A[k, k] = r
        A[k + 1, k] = 0
        for j in range(k + 1, n):
            u = A[k, j]
            v = A[k + 1, j]
            A[k, j] = ck * u + sk * v
            A[k + 1, j] = -np.conj(sk) * u + ck * v
    R = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for t in range(n - i):
            R[i, t] = A[i, i + t]
    return R, c, s


@njit(cache=True)
def _guard(p):
    return p if abs(p) >= EPS else EPS + 0j


@njit(cache=True)
def _rescale(x, x1, x2, lo):
    m = max(abs(x[lo]), abs(x1[lo]), abs(x2[lo]))
    if m > BIG:
        for j in range(lo, x.shape[0]):
            x[j] *= SMALL
            x1[j] *= SMALL
            x2[j] *= SMALL


@njit(cache=True)
def hyman_dense(V, V1, V2):
    """Hyman sweep on a Hessenberg matrix and its first two derivatives.

    Returns ``b, b', b'', q'/q, q''/q`` and the three work vectors. The
    vectors and the b-values share one arbitrary scale factor.
    """
    n = V.shape[0]
    x = np.zeros(n, dtype=np.complex128)
    x1 = np.zeros(n, dtype=np.complex128)
    x2 = np.zeros(n, dtype=np.complex128)
    x[n - 1] = 1.0
    qr1 = 0j
    dq = 0j
    for i in range(n - 1, 0, -1):
        sub = _guard(V[i, i - 1])
        a0 = 0j
        for j in range(i, n):
            a0 += V[i, j] * x[j]
        x[i - 1] = -a0 / sub
        a1 = 0j
        for j in range(i - 1, n):
            a1 += V1[i, j] * x[j]
        for j in range(i, n):
            a1 += V[i, j] * x1[j]
        x1[i - 1] = -a1 / sub
        a2 = 0j
        for j in range(i - 1, n):
            a2 += V2[i, j] * x[j] + 2.0 * V1[i, j] * x1[j]
        for j in range(i, n):
            a2 += V[i, j] * x2[j]
        x2[i - 1] = -a2 / sub
        r1 = V1[i, i - 1] / sub
        qr1 += r1
        dq += V2[i, i - 1] / sub - r1 * r1
        _rescale(x, x1, x2, i - 1)
    b = 0j
    b1 = 0j
    b2 = 0j
    for j in range(n):
        b += V[0, j] * x[j]
        b1 += V1[0, j] * x[j] + V[0, j] * x1[j]
        b2 += V2[0, j] * x[j] + 2.0 * V1[0, j] * x1[j] + V[0, j] * x2[j]
    return b, b1, b2, qr1, dq + qr1 * qr1, x, x1, x2


@njit(cache=True)
def hyman_band(B, B1, B2):
    """Hyman sweep for tridiagonal bands; O(n)."""
    n = B.shape[1]
    x = np.zeros(n, dtype=np.complex128)
    x1 = np.zeros(n, dtype=np.complex128)
    x2 = np.zeros(n, dtype=np.complex128)
    x[n - 1] = 1.0
    qr1 = 0j
    dq = 0j
    for i in range(n - 1, 0, -1):
        sub = _guard(B[0, i - 1])
        up = i < n - 1
        a0 = B[1, i] * x[i]
        if up:
            a0 += B[2, i] * x[i + 1]
        x[i - 1] = -a0 / sub
        a1 = B1[0, i - 1] * x[i - 1] + B1[1, i] * x[i] + B[1, i] * x1[i]
        if up:
            a1 += B1[2, i] * x[i + 1] + B[2, i] * x1[i + 1]
        x1[i - 1] = -a1 / sub
        a2 = (
            B2[0, i - 1] * x[i - 1]
            + B2[1, i] * x[i]
            + 2.0 * (B1[0, i - 1] * x1[i - 1] + B1[1, i] * x1[i])
            + B[1, i] * x2[i]
        )
        if up:
            a2 += B2[2, i] * x[i + 1] + 2.0 * B1[2, i] * x1[i + 1] + B[2, i] * x2[i + 1]
        x2[i - 1] = -a2 / sub
        r1 = B1[0, i - 1] / sub
        qr1 += r1
        dq += B2[0, i - 1] / sub - r1 * r1
        _rescale(x, x1, x2, i - 1)
    b = B[1, 0] * x[0]
    b1 = B1[1, 0] * x[0] + B[1, 0] * x1[0]
    b2 = B2[1, 0] * x[0] + 2.0 * B1[1, 0] * x1[0] + B[1, 0] * x2[0]
    if n > 1:
        b += B[2, 0] * x[1]
        b1 += B1[2, 0] * x[1] + B[2, 0] * x1[1]
        b2 += B2[2, 0] * x[1] + 2.0 * B1[2, 0] * x1[1] + B[2, 0] * x2[1]
    return b, b1, b2, qr1, dq + qr1 * qr1, x, x1, x2


@njit(cache=True)
def hyman_sums(b, b1, b2, qr1, qr2):
    """(p'/p, -(p'/p)') from the Hyman quantities; ok is False when b = 0."""
    if b == 0:
        return 0j, 0j, False
    s1 = (b1 + b * qr1) / b
    s2 = s1 * s1 - (b2 + 2.0 * b1 * qr1 + b * qr2) / b
    return s1, s2, True


@njit(cache=True)
def struct_inverse_apply(R, c, s, b):
    return band_solve_upper(R, apply_qh(c, s, b))


@njit(cache=True)
def struct_vectors(R, c, s, j):
    """Null vectors split at the smallest pivot j; ok False on a non-finite solve."""
    n = R.shape[0]
    w = R.shape[1]
    xh = np.zeros(n, dtype=np.complex128)
    xh[j] = 1.0
    for i in range(j - 1, -1, -1):
        acc = 0j
        for l in range(i + 1, min(j, i + w - 1) + 1):
            acc += R[i, l - i] * xh[l]
        xh[i] = -acc / R[i, 0]
    yh = np.zeros(n, dtype=np.complex128)
    yh[j] = 1.0
    for i in range(j + 1, n):
        acc = 0j
        for l in range(max(j, i - w + 1), i):
            acc += np.conj(R[l, i - l]) * yh[l]
        yh[i] = -acc / np.conj(R[i, 0])
    nx = vnorm(xh)
    ny = vnorm(yh)
    ok = np.isfinite(nx) and np.isfinite(ny)
    y = apply_q(c, s, yh)
    return xh / nx, y / vnorm(y), yh / ny, ok


@njit(cache=True)
def struct_inverse_iteration(R, c, s, x0, g0, maxit=20, tol=1e-12):
    """Inverse iteration on R^*R (right) and R R^* (left, in the Q^* basis)."""
    n = R.shape[0]
    # unit-sized copy (power-of-two scale) so the double solves cannot overflow
    nrm = vnorm(R.ravel())
    Rg = R / (2.0 ** np.round(np.log2(nrm)) if nrm > 0 and np.isfinite(nrm) else 1.0)
    for i in range(n):
        if abs(Rg[i, 0]) < EPS * EPS:
            Rg[i, 0] = EPS
    u = x0 / vnorm(x0)
    conv_x = False
    for step in range(maxit):
        v = band_solve_upper(Rg, band_solve_upper_h(Rg, u))
        nv = vnorm(v)
        if not np.isfinite(nv) or nv == 0:
            break
        v /= nv
        al = 0j
        for i in range(n):
            al += np.conj(v[i]) * u[i]
        u = v
        if step > 0 and abs(al) >= 1.0 - tol:
            conv_x = True
            break
    g = g0 / vnorm(g0)
    conv_y = False
    for step in range(maxit):
        v = band_solve_upper_h(Rg, band_solve_upper(Rg, g))
        nv = vnorm(v)
        if not np.isfinite(nv) or nv == 0:
            break
        v /= nv
        al = 0j
        for i in range(n):
            al += np.conj(v[i]) * g[i]
        g = v
        if step > 0 and abs(al) >= 1.0 - tol:
            conv_y = True
            break
    y = apply_q(c, s, g)
    return u / vnorm(u), y / vnorm(y), conv_x and conv_y


@njit(cache=True)
def band_residual_condition(B, B1, lam, x, y, weight, d, rev):
    """Backward errors and condition number for tridiagonal bands."""
    rx = band_matvec(B, x)
    ry = band_rmatvec(B, y)
    nx = vnorm(x)
    ny = vnorm(y)
    er = vnorm(rx) / (weight * nx)
    el = vnorm(ry) / (weight * ny)
    t = band_matvec(B1, x)
    yMx = 0j
    yM1x = 0j
    for i in range(x.shape[0]):
        yMx += np.conj(y[i]) * rx[i]
        yM1x += np.conj(y[i]) * t[i]
    num = weight * nx * ny
    if rev:
        den = abs(d * yMx - yM1x / lam)
    else:
        den = abs(yM1x)
    reliable = den >= EPS * num
    den_full = den if rev else abs(lam) * den
    if den_full == 0:
        return er, el, np.inf, False
    return er, el, num / den_full, reliable


@njit(cache=True)
def _evaluate(coeffs, bands, z, reverse, tri):
    if tri:
        V, V1, V2 = band_horner3(bands, z, reverse)
        R, c, s = tri_qr(V)
        b, b1, b2, q1, q2, _, _, _ = hyman_band(V, V1, V2)
    else:
        V, V1, V2 = horner3(coeffs, z, reverse)
        R, c, s = hess_qr(V)
        b, b1, b2, q1, q2, _, _, _ = hyman_dense(V, V1, V2)
    return V, V1, R, c, s, b, b1, b2, q1, q2


@njit(cache=True)
def struct_run(coeffs, bands, tri, weights, est, n_zero, N1, max_iter, bvec, kicks):
    """Sequential Laguerre driver for the Hessenberg (tri=False) and
    tridiagonal (tri=True) engines. Same outputs as the dense driver."""
    d = weights.shape[0] - 1
    n = bands.shape[2]
    nd = n * d
    m = est.shape[0]
    lams = np.zeros(m, dtype=np.complex128)
    status = np.zeros(m, dtype=np.int64)
    iters = np.zeros(m, dtype=np.int64)
    X = np.zeros((m, n), dtype=np.complex128)
    Y = np.zeros((m, n), dtype=np.complex128)
    berr = np.zeros((m, 2))
    cond = np.zeros(m)
    reliable = np.zeros(m, dtype=np.bool_)
    used_rev = np.zeros(m, dtype=np.bool_)
    nonfinite = False
    nk = kicks.shape[0]
    kick = 0
    bvecs = np.empty((3, n), dtype=np.complex128)
    for i in range(n):
        bvecs[0, i] = 1.0 / np.sqrt(n)
        bvecs[1, i] = bvec[i]
    for k in range(m):
        lam = est[k]
        it = 0
        st = 4
        prev_step = np.inf
        jmin = 0
        while True:
            rev = abs(lam) > 1.0
            if rev:
                used_rev[k] = True
                z = 1.0 / lam
                weight = weight_sum(weights, abs(z), True)
            else:
                z = lam
                weight = weight_sum(weights, abs(lam), False)
            V, V1, R, c, s, b, b1, b2, q1, q2 = _evaluate(coeffs, bands, z, rev, tri)
            jmin = 0
            for j in range(1, n):
                if abs(R[j, 0]) < abs(R[jmin, 0]):
                    jmin = j
            if abs(R[jmin, 0]) < weight * EPS:
                st = 1
                break
            e = np.zeros(n, dtype=np.complex128)
            e[n - 1] = 1.0
            bvecs[2] = apply_q(c, s, e)
            best = np.inf
            for t in range(3):
                zz = struct_inverse_apply(R, c, s, bvecs[t])
                nz = vnorm(zz)
                if not np.isfinite(nz):
                    best = 0.0
                    break
                if nz > 0:
                    best = min(best, vnorm(bvecs[t]) / (weight * nz))
            if best < EPS:
                st = 2
                break
            if it >= max_iter:
                st = 4
                break
            it += 1
            r1, r2, okb = hyman_sums(b, b1, b2, q1, q2)
            if not okb:
                st = 1
                break
            s1, s2 = lambda_sums(r1, r2, lam, rev, nd)
            collided = False
            if n_zero > 0:
                if lam == 0:
                    collided = True
                else:
                    inv = 1.0 / lam
                    s1 -= n_zero * inv
                    s2 -= n_zero * inv * inv
            for j in range(k):
                t2 = lam - lams[j]
                if t2 == 0:
                    collided = True
                    break
                inv = 1.0 / t2
                s1 -= inv
                s2 -= inv * inv
            if collided:
                lam = lam * (1.0 + 1e-3 * kicks[kick % nk]) if lam != 0 else 1e-3 * kicks[kick % nk]
                kick += 1
                continue
            lam_hat, ok = laguerre_update(lam, s1, s2, N1 - n_zero - k)
            if ok and not (np.isfinite(lam_hat.real) and np.isfinite(lam_hat.imag)):
                nonfinite = True
                ok = False
            if not ok:
                lam = lam * (1.0 + 1e-3 * kicks[kick % nk]) if lam != 0 else 1e-3 * kicks[kick % nk]
                kick += 1
                continue
            step = abs(lam_hat - lam)
            if stagnated(step, prev_step, lam):
                st = 3
                break
            prev_step = step
            lam = lam_hat
        lams[k] = lam
        status[k] = st
        iters[k] = it
        x, y, yh, ok = struct_vectors(R, c, s, jmin)
        if st != 1 or not ok:
            if not ok:
                x = np.ones(n, dtype=np.complex128)
                yh = np.ones(n, dtype=np.complex128)
            # the split solves can miss the null direction entirely; a small
            # generic component keeps inverse iteration from stalling on them
            x, y, _ = struct_inverse_iteration(R, c, s, x + 1e-3 * bvec, yh + 1e-3 * bvec)
        X[k] = x
        Y[k] = y
        if tri:
            er, el, cc, rel = band_residual_condition(V, V1, lam, x, y, weight, d, rev)
        else:
            er, el = residual_ratios(V, x, y, weight)
            cc, rel = finite_condition(V, V1, lam, x, y, weight, d, rev)
        berr[k, 0] = er
        berr[k, 1] = el
        cond[k] = cc
        reliable[k] = rel
    return lams, status, iters, X, Y, berr, cond, reliable, used_rev, nonfinite
