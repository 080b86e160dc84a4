import numpy as np
import pytest

from laguerre_pep.core import (
    MatrixPolynomial,
    ScalarPolynomial,
    Structure,
    coefficient_weights,
    eval_reversal,
    eval_with_derivatives,
)
from oracles import crandn, poly_derivs, poly_value


def test_constant_term_case(rng):
    A = crandn(rng, 2, 3, 3)
    t = eval_with_derivatives(MatrixPolynomial(A), 0.0)
    assert np.array_equal(t.value, A[0])
    assert np.array_equal(t.deriv1, A[1])
    assert not np.any(t.deriv2)
    assert not t.at_reversal


def test_identity_coefficients_at_half():
    P = MatrixPolynomial(np.array([np.eye(2)] * 3))
    t = eval_with_derivatives(P, 0.5)
    assert np.allclose(t.value, 1.75 * np.eye(2), rtol=0, atol=1e-15)
    assert np.allclose(t.deriv1, 2 * np.eye(2), rtol=0, atol=1e-15)
    assert np.allclose(t.deriv2, 2 * np.eye(2), rtol=0, atol=1e-15)


def test_derivatives_match_central_differences(rng):
    P = MatrixPolynomial(crandn(rng, 5, 3, 3))
    lam, h = 0.3 + 0.2j, 1e-6
    t = eval_with_derivatives(P, lam)
    fd1 = (P(lam + h) - P(lam - h)) / (2 * h)
    fd2 = (eval_with_derivatives(P, lam + h).deriv1 - eval_with_derivatives(P, lam - h).deriv1) / (2 * h)
    assert np.linalg.norm(t.deriv1 - fd1) <= 1e-6 * np.linalg.norm(t.deriv1)
    assert np.linalg.norm(t.deriv2 - fd2) <= 1e-6 * np.linalg.norm(t.deriv2)


def test_reversal_at_zero_is_leading_coefficient(rng):
    A = crandn(rng, 4, 2, 2)
    t = eval_reversal(MatrixPolynomial(A), 0.0)
    assert np.array_equal(t.value, A[-1])
    assert t.at_reversal


def test_reversal_degree_one_at_one(rng):
    A = crandn(rng, 2, 2, 2)
    t = eval_reversal(MatrixPolynomial(A), 1.0)
    assert np.allclose(t.value, A[0] + A[1], rtol=1e-15)


def test_reversal_cross_evaluation(rng):
    A = crandn(rng, 4, 2, 2)
    P = MatrixPolynomial(A)
    rho = 0.5
    got = eval_reversal(P, rho).value
    want = rho**3 * poly_value(A, 1 / rho)
    assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)


def test_weights_identity_pencil():
    w = coefficient_weights(MatrixPolynomial(np.array([np.eye(2), np.eye(2)])))
    assert np.allclose(w.norms, [np.sqrt(2), np.sqrt(2)])
    assert w.alpha(1.0) == pytest.approx(2 * np.sqrt(2))


def test_weights_identities(rng):
    A = crandn(rng, 4, 3, 3)
    w = coefficient_weights(MatrixPolynomial(A))
    assert w.alpha(0.0) == pytest.approx(np.linalg.norm(A[0]), rel=1e-15)
    lam = 2.0
    assert w.alpha_rev(1 / lam) * abs(lam) ** 3 == pytest.approx(w.alpha(lam), rel=1e-12)


def test_horner_matches_power_sum(rng):
    for d in range(1, 7):
        A = crandn(rng, d + 1, 3, 3)
        P = MatrixPolynomial(A)
        for lam in crandn(rng, 3) / 2:
            lam = lam / max(1, abs(lam))
            t = eval_with_derivatives(P, lam)
            d1, d2 = poly_derivs(A, lam)
            for got, want in ((t.value, poly_value(A, lam)), (t.deriv1, d1), (t.deriv2, d2)):
                assert np.linalg.norm(got - want) <= 1e-12 * max(np.linalg.norm(want), 1e-300)


def test_rejects_bad_input(rng):
    with pytest.raises(ValueError, match="zero matrix"):
        MatrixPolynomial(np.array([np.eye(2), np.zeros((2, 2))]))
    with pytest.raises(ValueError, match="tridiagonal structure"):
        MatrixPolynomial(np.ones((2, 3, 3)), Structure.TRIDIAGONAL)
    with pytest.raises(ValueError, match="hessenberg structure"):
        MatrixPolynomial(np.ones((2, 3, 3)), Structure.HESSENBERG)
    with pytest.raises(ValueError):
        MatrixPolynomial(np.ones((2, 2, 2)), Structure.SCALAR)
    with pytest.raises(ValueError):
        eval_with_derivatives(MatrixPolynomial(np.ones((2, 1, 1))), complex("nan"))


def test_scalar_polynomial_trims_and_converts():
    w = ScalarPolynomial([1, 2, 0, 0])
    assert w.d == 1
    P = w.to_matrix()
    assert P.structure is Structure.SCALAR and P.n == 1
    assert np.array_equal(ScalarPolynomial.from_matrix(P).coeffs, w.coeffs)
    with pytest.raises(ValueError):
        ScalarPolynomial([0, 0])


def test_bands_layout(rng):
    A = np.triu(np.tril(crandn(rng, 2, 4, 4), 1), -1)
    B = MatrixPolynomial(A, Structure.TRIDIAGONAL).bands
    assert np.array_equal(B[:, 1], np.diagonal(A, axis1=1, axis2=2))
    assert np.array_equal(B[:, 0, :3], np.diagonal(A, -1, axis1=1, axis2=2))
    assert np.array_equal(B[:, 2, :3], np.diagonal(A, 1, axis1=1, axis2=2))
