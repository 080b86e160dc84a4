import numpy as np
import pytest

from laguerre_pep.core import EPS, MatrixPolynomial
from laguerre_pep.dense import (
    check_stop,
    eigenvectors_from_factors,
    factor_at,
    laguerre_correction_dense,
    qr_col_pivot,
    singular_vectors,
    solve_dense,
)
from laguerre_pep.core import coefficient_weights
from laguerre_pep.generate import generate
from laguerre_pep.status import Kind, StopStatus
from oracles import crandn, eta, greedy_distance, linearization_eigs, poly_derivs, poly_value, sigma_min


def _diag_pencil(*diag):
    return MatrixPolynomial(np.array([-np.diag(diag).astype(complex), np.eye(len(diag))]))


def test_qr_identity():
    f = qr_col_pivot(np.eye(3))
    assert np.allclose(np.abs(f.q), np.eye(3)) and np.allclose(np.abs(f.r), np.eye(3))
    assert list(f.perm) == [0, 1, 2]


def test_qr_pivots_largest_column():
    f = qr_col_pivot(np.diag([1.0, 3.0]))
    assert list(f.perm) == [1, 0]
    assert abs(f.r[0, 0]) == pytest.approx(3.0)


def test_qr_reconstruction(rng):
    for _ in range(20):
        M = crandn(rng, 5, 5)
        f = qr_col_pivot(M)
        assert np.linalg.norm(f.q @ f.r - M[:, f.perm]) <= 1e-13 * np.linalg.norm(M)
        assert np.allclose(f.q.conj().T @ f.q, np.eye(5), atol=1e-14)
        assert np.all(np.diff(np.abs(np.diag(f.r))) <= 1e-12)


def test_qr_of_badly_scaled_matrix(rng):
    for scale in (1e-200, 1e200):
        M = crandn(rng, 4, 4) * scale
        M[:, 2] *= 1e-12
        f = qr_col_pivot(M)
        assert np.linalg.norm(f.q @ f.r - M[:, f.perm]) <= 1e-13 * np.linalg.norm(M)
        assert abs(f.r[3, 3]) > 0


def test_correction_partial_fractions():
    P = _diag_pencil(1.0, 2.0)
    s1, s2 = laguerre_correction_dense(P, 3.0, factor_at(P, 3.0))
    assert s1 == pytest.approx(1.5, rel=1e-15)
    assert s2 == pytest.approx(1.25, rel=1e-15)


def test_correction_scalar_collapse(rng):
    for _ in range(20):
        a = crandn(rng, 6)
        P = MatrixPolynomial(a.reshape(-1, 1, 1))
        lam = complex(crandn(rng, 1)[0]) * 0.7
        p = np.polynomial.Polynomial(a)
        r1 = p.deriv()(lam) / p(lam)
        r2 = r1**2 - p.deriv(2)(lam) / p(lam)
        s1, s2 = laguerre_correction_dense(P, lam, factor_at(P, lam))
        assert s1 == pytest.approx(r1, rel=1e-12)
        assert s2 == pytest.approx(r2, rel=1e-12)


def test_correction_matches_oracle_traces(rng):
    for _ in range(10):
        A = crandn(rng, 4, 3, 3)
        P = MatrixPolynomial(A)
        for lam in (0.4 + 0.3j, 2.0 - 1.5j):
            M = poly_value(A, lam)
            d1, d2 = poly_derivs(A, lam)
            X1 = np.linalg.solve(M, d1)
            X2 = np.linalg.solve(M, d2)
            s1, s2 = laguerre_correction_dense(P, lam, factor_at(P, lam))
            assert s1 == pytest.approx(np.trace(X1), rel=1e-9)
            assert s2 == pytest.approx(np.trace(X1 @ X1 - X2), rel=1e-9)


def test_correction_continuous_across_unit_circle(rng):
    for _ in range(10):
        P = MatrixPolynomial(crandn(rng, 4, 3, 3))
        u = np.exp(2j * np.pi * rng.random())
        lo, hi = u * (1 - 1e-8), u * (1 + 1e-8)
        a = laguerre_correction_dense(P, lo, factor_at(P, lo))[0]
        b = laguerre_correction_dense(P, hi, factor_at(P, hi))[0]
        assert factor_at(P, hi).at_reversal and not factor_at(P, lo).at_reversal
        assert abs(a - b) <= 1e-6 * abs(a)


def test_stop_at_exact_eigenvalue():
    P = _diag_pencil(1.0, 2.0)
    assert check_stop(P, 2.0, factor_at(P, 2.0)) is StopStatus.CRITERION1


def test_no_stop_far_from_spectrum():
    P = _diag_pencil(1.0, 2.0)
    assert check_stop(P, -0.5j, factor_at(P, -0.5j)) is None


def test_stop_near_converged_eigenvalue():
    # a relative shift delta leaves a backward error near delta / cond, so the
    # criteria (threshold eps) can only fire within a few ulps of the root
    hits = total = 0
    for seed in range(10):
        P = generate("general", 3, 2, seed=seed)
        for r in solve_dense(P):
            if r.status is not StopStatus.CRITERION1:
                continue
            assert check_stop(P, r.lam, factor_at(P, r.lam)) is not None
            lam = r.lam * (1 + EPS)
            total += 1
            hits += check_stop(P, lam, factor_at(P, lam)) in (StopStatus.CRITERION1, StopStatus.CRITERION2)
    assert hits >= 0.9 * total


def test_eigenvectors_of_diagonal_pencil():
    P = _diag_pencil(1.0, 2.0)
    x, y = eigenvectors_from_factors(factor_at(P, 2.0))
    assert abs(abs(x[1]) - 1) < 1e-15 and abs(x[0]) < 1e-15
    assert abs(abs(y[1]) - 1) < 1e-15 and abs(y[0]) < 1e-15


def test_criterion1_residuals_left_and_right():
    for seed in range(10):
        P = generate("general", 4, 3, seed=seed)
        for r in solve_dense(P):
            if r.status is StopStatus.CRITERION1 and r.kind is Kind.FINITE:
                bound = 10 * (2 * P.n + 1) * EPS
                assert eta(P.coeffs, r.lam, r.x) <= bound
                assert eta(P.coeffs.conj().transpose(0, 2, 1), np.conj(r.lam), r.y) <= bound


def test_singular_vectors_diagonal():
    f = qr_col_pivot(np.diag([3.0, 1.0, 0.01]).astype(complex))
    x, y = singular_vectors(f)
    assert abs(abs(x[2]) - 1) < 1e-10 and abs(abs(y[2]) - 1) < 1e-10


def test_singular_vectors_random(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        M = crandn(rng, n, n)
        x, y = singular_vectors(qr_col_pivot(M))
        s = sigma_min(M)
        assert np.linalg.norm(M @ x) <= 1.01 * s
        assert np.linalg.norm(y.conj() @ M) <= 1.01 * s


def test_singular_vectors_unitary(rng):
    Q, _ = np.linalg.qr(crandn(rng, 4, 4))
    x, _ = singular_vectors(qr_col_pivot(Q))
    assert np.linalg.norm(Q @ x) == pytest.approx(1.0, abs=1e-10)


def test_lambda_squared_minus_identity():
    P = MatrixPolynomial(np.array([-np.eye(2), np.zeros((2, 2)), np.eye(2)]))
    res = solve_dense(P)
    assert greedy_distance([r.eigenvalue for r in res], [1, 1, -1, -1]) < 1e-14
    assert all(r.berr <= 1e-14 for r in res)


def test_block_diagonal_from_scalar_factors(rng):
    n, d = 3, 4
    roots = np.array([[0.5, -1.5, 2 + 1j, -0.3j], [3.0, 1.2j, -2.2, 0.8 + 0.8j], [-0.7, 1.5 - 1j, 4.0, 0.1]])
    A = np.zeros((d + 1, n, n), dtype=complex)
    for j in range(n):
        A[:, j, j] = np.poly(roots[j])[::-1]
    Qm, _ = np.linalg.qr(crandn(rng, n, n))
    A = np.einsum("ab,ibc,cd->iad", Qm, A, Qm.conj().T)
    res = solve_dense(MatrixPolynomial(A))
    assert greedy_distance([r.lam for r in res], roots.ravel()) <= 1e-8


def test_rank_deficient_ends():
    P = generate("rank-deficient-ends(1)", 3, 2, seed=0)
    res = solve_dense(P)
    kinds = [r.kind for r in res]
    assert kinds.count(Kind.ZERO) == 1 and kinds.count(Kind.INFINITE) == 1
    assert kinds.count(Kind.FINITE) == 4


def test_matches_linearization():
    for seed in range(10):
        P = generate("general", 3, 3, seed=seed)
        lams = [r.lam for r in solve_dense(P)]
        assert greedy_distance(lams, linearization_eigs(P.coeffs)) <= 1e-8


def test_criterion2_backward_error():
    seen = 0
    for seed in range(40):
        P = generate("general", 6, 3, seed=seed)
        w = coefficient_weights(P)
        for r in solve_dense(P):
            if r.status is StopStatus.CRITERION2:
                seen += 1
                M = P(r.lam) if abs(r.lam) <= 1 else P.reversal()(1 / r.lam)
                assert sigma_min(M) / w.at(r.lam) <= 10 * EPS
    assert seen > 0


def test_reversal_problem_has_reciprocal_spectrum():
    for seed in range(5):
        P = generate("general", 3, 3, seed=seed)
        a = [r.lam for r in solve_dense(P)]
        b = [1 / r.lam for r in solve_dense(P.reversal())]
        assert greedy_distance(a, b) <= 1e-8


def test_reversal_exchanges_zero_and_infinite():
    P = generate("rank-deficient-ends(2)", 4, 2, seed=1)
    kinds = [r.kind for r in solve_dense(P.reversal())]
    assert kinds.count(Kind.ZERO) == 2 and kinds.count(Kind.INFINITE) == 2


def test_count_and_determinism():
    P = generate("general", 4, 3, seed=7)
    a, b = solve_dense(P, seed=3), solve_dense(P, seed=3)
    assert len(a) == 12
    assert [r.lam for r in a] == [r.lam for r in b]


def test_max_iter_flagged_not_dropped():
    P = generate("general", 3, 3, seed=2)
    res = solve_dense(P, max_iter=1)
    assert len(res) == 9
    assert any(r.status is StopStatus.MAX_ITER for r in res)
    assert all(not r.converged for r in res if r.status is StopStatus.MAX_ITER)
