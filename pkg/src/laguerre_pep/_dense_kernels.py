"""Numba kernels for the general (dense) path: pivoted QR, solves through the
factors, trace corrections and inverse iteration."""

import numpy as np
from numba import njit

from .core import EPS, horner3, weight_sum
from .metrics import finite_condition, residual_ratios, vnorm
from .scalar import laguerre_update, stagnated


@njit(cache=True)
def qrp(M):
    """Householder QR with greedy column pivoting: Q R = M[:, perm]."""
    n = M.shape[0]
    # work on a power-of-two rescaled copy so squared column norms stay in range
    big = 0.0
    for i in range(n):
        for j in range(n):
            big = max(big, abs(M[i, j]))
    scale = 1.0
    if big > 0.0 and np.isfinite(big):
        scale = 2.0 ** np.round(np.log2(big))
    A = M / scale
    Q = np.eye(n, dtype=np.complex128)
    perm = np.arange(n)
    v = np.empty(n, dtype=np.complex128)
    for k in range(n):
        best = k
        bestnorm = -1.0
        for j in range(k, n):
            s = 0.0
            for i in range(k, n):
                s += A[i, j].real * A[i, j].real + A[i, j].imag * A[i, j].imag
            if s > bestnorm:
                bestnorm = s
                best = j
        if best != k:
            for i in range(n):
                t = A[i, k]
                A[i, k] = A[i, best]
                A[i, best] = t
            t2 = perm[k]
            perm[k] = perm[best]
            perm[best] = t2
        if k == n - 1:
            break
        for i in range(k, n):
            v[i] = A[i, k]
        alpha = vnorm(v[k:])
        if alpha == 0.0:
            continue
        x0 = A[k, k]
        phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0j
        v[k] += phase * alpha
        # ||v||^2 = 2 alpha (alpha + |x0|), without squaring small entries
        beta = 1.0 / (alpha * (alpha + abs(x0)))
        # A <- (I - beta v v^*) A on rows k.., columns k..
        for j in range(k, n):
            s = 0j
            for i in range(k, n):
                s += np.conj(v[i]) * A[i, j]
            s *= beta
            for i in range(k, n):
                A[i, j] -= s * v[i]
        for i in range(k + 1, n):
            A[i, k] = 0
        # Q <- Q (I - beta v v^*)
        for i in range(n):
            s = 0j
            for l in range(k, n):
                s += Q[i, l] * v[l]
            s *= beta
            for l in range(k, n):
                Q[i, l] -= s * np.conj(v[l])
    return Q, A * scale, perm


@njit(cache=True)
def solve_upper(R, b):
    """R z = b for upper triangular R (vector b)."""
    n = R.shape[0]
    z = b.copy()
    for i in range(n - 1, -1, -1):
        s = z[i]
        for j in range(i + 1, n):
            s -= R[i, j] * z[j]
        z[i] = s / R[i, i]
    return z


@njit(cache=True)
def solve_upper_h(R, b):
    """R^* z = b for upper triangular R."""
    n = R.shape[0]
    z = b.copy()
    for i in range(n):
        s = z[i]
        for j in range(i):
            s -= np.conj(R[j, i]) * z[j]
        z[i] = s / np.conj(R[i, i])
    return z


@njit(cache=True)
def qh_times(Q, b):
    n = Q.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        s = 0j
        for i in range(n):
            s += np.conj(Q[i, j]) * b[i]
        out[j] = s
    return out


@njit(cache=True)
def inverse_apply(Q, R, perm, b):
    """M^{-1} b through the factors of M[:, perm] = Q R."""
    z = solve_upper(R, qh_times(Q, b))
    out = np.empty_like(z)
    for k in range(z.shape[0]):
        out[perm[k]] = z[k]
    return out


@njit(cache=True)
def dense_sums(Q, R, perm, D1, D2):
    """trace(Y1) and trace(Y1^2 - Y2) with Y_k = R^{-1} Q^* D_k[:, perm].

    Y_k is similar to M^{-1} D_k, so the traces equal those of X_1, X_2.
    """
    n = Q.shape[0]
    Qh = np.ascontiguousarray(Q.conj().T)
    Z1 = Qh @ np.ascontiguousarray(D1[:, perm])
    Z2 = Qh @ np.ascontiguousarray(D2[:, perm])
    # Y1 = R^{-1} Z1, every column in full
    for c in range(n):
        for i in range(n - 1, -1, -1):
            s = Z1[i, c]
            for j in range(i + 1, n):
                s -= R[i, j] * Z1[j, c]
            Z1[i, c] = s / R[i, i]
    # only the diagonal of Y2 is needed: column c stops at row c
    tr2 = 0j
    for c in range(n):
        for i in range(n - 1, c - 1, -1):
            s = Z2[i, c]
            for j in range(i + 1, n):
                s -= R[i, j] * Z2[j, c]
            Z2[i, c] = s / R[i, i]
        tr2 += Z2[c, c]
    tr1 = 0j
    trsq = 0j
    for i in range(n):
        tr1 += Z1[i, i]
        for j in range(n):
            trsq += Z1[i, j] * Z1[j, i]
    return tr1, trsq - tr2


@njit(cache=True)
def lambda_sums(tr1, tr2, lam, rev, nd):
    """Map the trace pair to S1 = p'/p and S2 = -(p'/p)' at lam.

    Without ``rev`` the traces already are S1, S2; with ``rev`` they belong
    to rP at rho = 1/lam.
    """
    if not rev:
        return tr1, tr2
    rho = 1.0 / lam
    # trace(X3^2 - X4) = tr2, trace(X3) = tr1
    s1 = rho * (nd - rho * tr1)
    s2 = rho * rho * (nd - 2.0 * rho * tr1 + rho * rho * tr2)
    return s1, s2


@njit(cache=True)
def crit2_ratio(Q, R, perm, bvecs, weight):
    """min_b ||b|| / (weight ||M^{-1} b||) over the rows of ``bvecs``."""
    best = np.inf
    for k in range(bvecs.shape[0]):
        b = bvecs[k]
        z = inverse_apply(Q, R, perm, b)
        nz = vnorm(z)
        if not np.isfinite(nz):
            return 0.0
        if nz == 0:
            continue
        r = vnorm(b) / (weight * nz)
        if r < best:
            best = r
    return best


@njit(cache=True)
def vectors_from_factors(Q, R, perm):
    """x = E xhat with R11 xhat = -R(:n-1, n), xhat_n = 1; y = Q e_n.

    ``ok`` is False when the leading block is singular.
    """
    n = Q.shape[0]
    xh = np.zeros(n, dtype=np.complex128)
    xh[n - 1] = 1.0
    ok = True
    for i in range(n - 2, -1, -1):
        s = -R[i, n - 1]
        for j in range(i + 1, n - 1):
            s -= R[i, j] * xh[j]
        if R[i, i] == 0:
            ok = False
            break
        xh[i] = s / R[i, i]
    x = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        x[perm[k]] = xh[k]
    nx = vnorm(x)
    if not np.isfinite(nx) or nx == 0:
        ok = False
        x[:] = 0
        x[perm[n - 1]] = 1.0
        nx = 1.0
    y = Q[:, n - 1].copy()
    return x / nx, y / vnorm(y), ok


@njit(cache=True)
def _guarded_diag(R):
    """R scaled to unit size by a power of two, with exactly zero pivots lifted
    to eps, so the solves of inverse iteration neither overflow nor divide by 0."""
    n = R.shape[0]
    nrm = vnorm(R.ravel())
    Rg = R / (2.0 ** np.round(np.log2(nrm)) if nrm > 0 and np.isfinite(nrm) else 1.0)
    for i in range(n):
        if abs(Rg[i, i]) < EPS * EPS:
            Rg[i, i] = EPS
    return Rg


@njit(cache=True)
def inverse_iteration(Q, R, perm, x0, y0, maxit=20, tol=1e-12):
    """Smallest right/left singular vectors of M = Q R E^T by inverse iteration.

    Right: E (R^* R)^{-1} E^T; left: Q (R R^*)^{-1} Q^*. Returns
    ``(x, y, converged)``.
    """
    n = Q.shape[0]
    Rg = _guarded_diag(R)
    # right vector in the permuted basis
    u = np.empty(n, dtype=np.complex128)
    for k in range(n):
        u[k] = x0[perm[k]]
    u /= vnorm(u)
    conv_x = False
    for step in range(maxit):
        w = solve_upper(Rg, solve_upper_h(Rg, u))
        nw = vnorm(w)
        if not np.isfinite(nw) or nw == 0:
            break
        w /= nw
        s = 0j
        for i in range(n):
            s += np.conj(w[i]) * u[i]
        u = w
        if step > 0 and abs(s) >= 1.0 - tol:
            conv_x = True
            break
    x = np.empty(n, dtype=np.complex128)
    for k in range(n):
        x[perm[k]] = u[k]
    # left vector: iterate on g = Q^* y, (R R^*)^{-1} g
    g = qh_times(Q, y0)
    g /= vnorm(g)
    conv_y = False
    for step in range(maxit):
        w = solve_upper_h(Rg, solve_upper(Rg, g))
        nw = vnorm(w)
        if not np.isfinite(nw) or nw == 0:
            break
        w /= nw
        s = 0j
        for i in range(n):
            s += np.conj(w[i]) * g[i]
        g = w
        if step > 0 and abs(s) >= 1.0 - tol:
            conv_y = True
            break
    y = Q @ g
    return x / vnorm(x), y / vnorm(y), conv_x and conv_y


@njit(cache=True)
def dense_run(coeffs, weights, est, n_zero, N1, max_iter, bvec, kicks, want_vectors):
    """Laguerre iteration for every initial estimate, one after another.

    Previously finished eigenvalues and ``n_zero`` zero eigenvalues are
    deflated from the sums. Returns eigenvalues, statuses, iteration counts,
    vectors, right/left backward errors, condition numbers, reliability
    flags, a per-eigenvalue reversal-path flag and a non-finite flag.
    """
    d = coeffs.shape[0] - 1
    n = coeffs.shape[1]
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
        while True:
            rev = abs(lam) > 1.0
            if rev:
                used_rev[k] = True
                rho = 1.0 / lam
                M, M1, M2 = horner3(coeffs, rho, True)
                weight = weight_sum(weights, abs(rho), True)
            else:
                M, M1, M2 = horner3(coeffs, lam, False)
                weight = weight_sum(weights, abs(lam), False)
            Q, R, perm = qrp(M)
            if abs(R[n - 1, n - 1]) < weight * EPS:
                st = 1
                break
            for i in range(n):
                bvecs[2, i] = Q[i, n - 1]
            if crit2_ratio(Q, R, perm, bvecs, weight) < EPS:
                st = 2
                break
            if it >= max_iter:
                st = 4
                break
            it += 1
            tr1, tr2 = dense_sums(Q, R, perm, M1, M2)
            s1, s2 = lambda_sums(tr1, tr2, lam, rev, nd)
            collided = False
            if n_zero > 0:
                if lam == 0:
                    collided = True
                else:
                    inv = 1.0 / lam
                    s1 -= n_zero * inv
                    s2 -= n_zero * inv * inv
            for j in range(k):
                t = lam - lams[j]
                if t == 0:
                    collided = True
                    break
                inv = 1.0 / t
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
        if not want_vectors:
            continue
        x, y, ok = vectors_from_factors(Q, R, perm)
        if st != 1 or not ok:
            x, y, _ = inverse_iteration(Q, R, perm, x + 1e-3 * bvec, y + 1e-3 * bvec)
        X[k] = x
        Y[k] = y
        er, el = residual_ratios(M, x, y, weight)
        berr[k, 0] = er
        berr[k, 1] = el
        c, rel = finite_condition(M, M1, lam, x, y, weight, d, rev)
        cond[k] = c
        reliable[k] = rel
    return lams, status, iters, X, Y, berr, cond, reliable, used_rev, nonfinite
