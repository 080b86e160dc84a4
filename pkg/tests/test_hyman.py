import numpy as np
import pytest

from laguerre_pep.core import EPS, MatrixPolynomial, Structure
from laguerre_pep.dense import factor_at, laguerre_correction_dense, solve_dense
from laguerre_pep.generate import generate
from laguerre_pep.hyman import (
    eigenvectors_hessenberg,
    hessenberg_qr,
    hyman_eval,
    laguerre_correction_hyman,
    solve_structured,
)
from laguerre_pep.status import Kind, StopStatus
from oracles import crandn, eta, greedy_distance


def _corr(P, lam):
    lam = complex(lam)
    if abs(lam) > 1:
        v = hyman_eval(P, 1 / lam, at_reversal=True)
    else:
        v = hyman_eval(P, lam)
    return laguerre_correction_hyman(v, P.n * P.d, lam)


def test_one_by_one(rng):
    a = crandn(rng, 4)
    P = MatrixPolynomial(a.reshape(-1, 1, 1), Structure.HESSENBERG)
    v = hyman_eval(P, 0.3)
    p = np.polynomial.Polynomial(a)
    assert v.b == pytest.approx(p(0.3), rel=1e-14)
    assert v.b1 == pytest.approx(p.deriv()(0.3), rel=1e-14)
    assert v.b2 == pytest.approx(p.deriv(2)(0.3), rel=1e-14)
    assert v.q_ratio1 == 0 and v.q_ratio2 == 0


def test_two_by_two_log_derivative():
    A = np.array([-np.array([[0, 1], [1, 0]]), np.eye(2)], dtype=complex)
    P = MatrixPolynomial(A, Structure.TRIDIAGONAL)
    s1, s2 = _corr(P, 0.5)
    assert s1 == pytest.approx(2 * 0.5 / (0.25 - 1), rel=1e-14)
    # at lam = 2 the reversal branch is used
    s1, _ = _corr(P, 2.0)
    assert s1 == pytest.approx(4 / 3, rel=1e-14)


def test_matches_dense_on_tridiagonal():
    for seed in range(5):
        P = generate("tridiagonal", 6, 3, seed=seed)
        for lam in (0.3 + 0.1j, -0.8j, 1.7 + 0.4j):
            h = _corr(P, lam)
            g = laguerre_correction_dense(P, lam, factor_at(P, lam))
            assert h[0] == pytest.approx(g[0], rel=1e-9)
            assert h[1] == pytest.approx(g[1], rel=1e-9)


def test_matches_dense_on_hessenberg():
    for seed in range(5):
        P = generate("hessenberg", 5, 2, seed=seed)
        for lam in (0.2 - 0.5j, 3.0 + 1j):
            h = _corr(P, lam)
            g = laguerre_correction_dense(P, lam, factor_at(P, lam))
            assert h[0] == pytest.approx(g[0], rel=1e-9)
            assert h[1] == pytest.approx(g[1], rel=1e-9)


def test_scalar_collapse(rng):
    for _ in range(10):
        a = crandn(rng, 5)
        P = MatrixPolynomial(a.reshape(-1, 1, 1), Structure.TRIDIAGONAL)
        lam = 0.6 * np.exp(2j * np.pi * rng.random())
        p = np.polynomial.Polynomial(a)
        r1 = p.deriv()(lam) / p(lam)
        s1, s2 = _corr(P, lam)
        assert s1 == pytest.approx(r1, rel=1e-12)
        assert s2 == pytest.approx(r1**2 - p.deriv(2)(lam) / p(lam), rel=1e-12)


def test_zero_subdiagonal_substitution():
    dvals = np.array([0.1, -0.4, 0.6j, 0.9])
    P = MatrixPolynomial(np.array([-np.diag(dvals), np.eye(4)]), Structure.TRIDIAGONAL)
    lam = 0.2 + 0.3j
    s1, _ = _corr(P, lam)
    assert s1 == pytest.approx(np.sum(1 / (lam - dvals)), rel=1e-6)


def test_seam_continuity(rng):
    for seed in range(5):
        P = generate("tridiagonal", 5, 3, seed=seed)
        u = np.exp(2j * np.pi * rng.random())
        a = _corr(P, u * (1 - 1e-8))[0]
        b = _corr(P, u * (1 + 1e-8))[0]
        assert abs(a - b) <= 1e-6 * abs(a)


def test_qr_of_triangular(rng):
    M = np.triu(crandn(rng, 5, 5))
    f, count = hessenberg_qr(M)
    assert np.allclose(np.abs(f.q), np.eye(5), atol=1e-15)
    assert np.allclose(np.abs(f.r), np.abs(M), atol=1e-15)
    assert count == 4


def test_qr_reconstruction(rng):
    for _ in range(10):
        M = np.triu(crandn(rng, 6, 6), -1)
        f, count = hessenberg_qr(M)
        assert count == 5
        assert list(f.perm) == list(range(6))
        assert np.linalg.norm(f.q @ f.r - M) <= 1e-13 * np.linalg.norm(M)
        assert np.allclose(np.tril(f.r, -1), 0)


def test_qr_rejects_non_hessenberg():
    with pytest.raises(ValueError):
        hessenberg_qr(np.ones((3, 3)))


def test_vectors_from_diagonal():
    f, _ = hessenberg_qr(np.diag([2.0, 1e-20, 3.0, 1.0]).astype(complex))
    x, y = eigenvectors_hessenberg(f)
    assert abs(abs(x[1]) - 1) < 1e-15 and abs(abs(y[1]) - 1) < 1e-15


def test_structured_residuals_left_and_right():
    for kind in ("tridiagonal", "hessenberg"):
        for seed in range(10):
            P = generate(kind, 6, 3, seed=seed)
            bound = 10 * (2 * P.n + 1) * EPS
            for r in solve_structured(P):
                if r.status is StopStatus.CRITERION1 and r.kind is Kind.FINITE:
                    assert eta(P.coeffs, r.lam, r.x) <= bound
                    assert eta(P.coeffs.conj().transpose(0, 2, 1), np.conj(r.lam), r.y) <= bound


def test_toeplitz_closed_form():
    n = 4
    T = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    P = MatrixPolynomial(np.array([-T, np.zeros((n, n)), np.eye(n)]), Structure.TRIDIAGONAL)
    mu = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    want = np.concatenate([np.sqrt(mu), -np.sqrt(mu)])
    assert greedy_distance([r.lam for r in solve_structured(P)], want) <= 1e-8


def test_hessenberg_matches_dense():
    for seed in range(5):
        A = generate("general", 5, 2, seed=seed).coeffs
        P = MatrixPolynomial(np.triu(A, -1), Structure.HESSENBERG)
        a = [r.lam for r in solve_structured(P)]
        b = [r.lam for r in solve_dense(P)]
        assert greedy_distance(a, b) <= 1e-8


def test_singular_leading_coefficient():
    A = np.array([[[1, 2], [3, 1]], [[1, 1], [1, 1]]], dtype=complex)
    res = solve_structured(MatrixPolynomial(A, Structure.TRIDIAGONAL))
    assert [r.kind for r in res].count(Kind.INFINITE) == 1
    assert len(res) == 2


def test_engine_equivalence(rng):
    for seed in range(50):
        n, d = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        P = generate("tridiagonal", n, d, seed=seed)
        a = [r.eigenvalue for r in solve_structured(P)]
        b = [r.eigenvalue for r in solve_dense(P)]
        assert greedy_distance(a, b) <= 1e-6


def test_rejects_general_structure():
    with pytest.raises(ValueError):
        solve_structured(generate("general", 3, 2))
