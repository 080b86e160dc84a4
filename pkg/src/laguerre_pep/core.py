"""Matrix polynomial types and Horner evaluation of P, its reversal, and derivatives."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

EPS = 2.0**-53


class Structure(str, enum.Enum):
    GENERAL = "general"
    HESSENBERG = "hessenberg"
    TRIDIAGONAL = "tridiagonal"
    SCALAR = "scalar"


class NonRegularError(ValueError):
    """Raised when the input looks like a singular (non-regular) matrix polynomial."""


def _violates_structure(A: np.ndarray, structure: Structure) -> tuple[int, int] | None:
    """Return the first offending (row, col) for the structure tag, or None."""
    n = A.shape[0]
    if structure in (Structure.HESSENBERG, Structure.TRIDIAGONAL):
        rows, cols = np.nonzero(np.tril(A, -2))
        if rows.size:
            return int(rows[0]), int(cols[0])
    if structure is Structure.TRIDIAGONAL:
        rows, cols = np.nonzero(np.triu(A, 2))
        if rows.size:
            return int(rows[0]), int(cols[0])
    if structure is Structure.SCALAR and n != 1:
        return 0, 1
    return None


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """P(lam) = sum_i lam**i * coeffs[i] with coeffs of shape (d+1, n, n).

    Coefficients are stored dense for every structure tag; the tag only
    selects which solver path is allowed to exploit it.
    """

    coeffs: np.ndarray
    structure: Structure = Structure.GENERAL
    name: str | None = None

    def __post_init__(self):
        A = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if A.ndim == 1:
            A = A.reshape(-1, 1, 1)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError(f"coefficients must have shape (d+1, n, n), got {A.shape}")
        if A.shape[0] < 2:
            raise ValueError("degree must be at least 1")
        if A.shape[1] < 1:
            raise ValueError("matrix dimension must be positive")
        if not np.all(np.isfinite(A)):
            raise ValueError("coefficients must be finite")
        if not np.any(A[-1]):
            raise ValueError("leading coefficient A_d is the zero matrix")
        structure = Structure(self.structure)
        for i, Ai in enumerate(A):
            bad = _violates_structure(Ai, structure)
            if bad is not None:
                raise ValueError(
                    f"A_{i} violates {structure.value} structure at entry {bad}"
                )
        object.__setattr__(self, "coeffs", A)
        object.__setattr__(self, "structure", structure)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def d(self) -> int:
        return self.coeffs.shape[0] - 1

    @cached_property
    def bands(self) -> np.ndarray:
        """Sub-, main- and super-diagonals as an array of shape (d+1, 3, n).

        ``bands[i, 0, k] = A_i[k+1, k]`` and ``bands[i, 2, k] = A_i[k, k+1]``;
        the last slot of the off-diagonal rows is unused and zero.
        """
        n = self.n
        B = np.zeros((self.d + 1, 3, n), dtype=np.complex128)
        k = np.arange(n - 1)
        B[:, 0, : n - 1] = self.coeffs[:, k + 1, k]
        B[:, 1, :] = self.coeffs[:, np.arange(n), np.arange(n)]
        B[:, 2, : n - 1] = self.coeffs[:, k, k + 1]
        return B

    def reversal(self) -> MatrixPolynomial:
        """The reversal polynomial as a problem of its own (requires A_0 != 0)."""
        return MatrixPolynomial(self.coeffs[::-1].copy(), self.structure, self.name)

    def __call__(self, lam: complex) -> np.ndarray:
        return eval_with_derivatives(self, lam).value


@dataclass(frozen=True, eq=False)
class ScalarPolynomial:
    """w(lam) = sum_i coeffs[i] * lam**i, trailing zero coefficients trimmed."""

    coeffs: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128)).ravel()
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        nz = np.flatnonzero(a)
        if nz.size == 0:
            raise ValueError("the zero polynomial has no roots")
        object.__setattr__(self, "coeffs", np.ascontiguousarray(a[: nz[-1] + 1]))

    @property
    def d(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def from_matrix(cls, P: MatrixPolynomial) -> ScalarPolynomial:
        if P.n != 1:
            raise ValueError("only a 1x1 matrix polynomial is a scalar polynomial")
        return cls(P.coeffs[:, 0, 0])

    def to_matrix(self) -> MatrixPolynomial:
        return MatrixPolynomial(self.coeffs.reshape(-1, 1, 1), Structure.SCALAR)


@dataclass(frozen=True)
class EvalTriple:
    value: np.ndarray
    deriv1: np.ndarray
    deriv2: np.ndarray
    at_reversal: bool = False


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def horner3(coeffs, lam, reverse):
    """Value, first and second derivative of sum_i lam**i A_i in one sweep.

    With ``reverse`` the coefficient order is flipped, giving rP(lam).
    """
    d = coeffs.shape[0] - 1
    n = coeffs.shape[1]
    m = coeffs.shape[2]
    top = 0 if reverse else d
    v = coeffs[top].copy()
    d1 = np.zeros((n, m), dtype=np.complex128)
    d2 = np.zeros((n, m), dtype=np.complex128)
    for step in range(d - 1, -1, -1):
        k = d - step if reverse else step
        for i in range(n):
            for j in range(m):
                d2[i, j] = d2[i, j] * lam + 2.0 * d1[i, j]
                d1[i, j] = d1[i, j] * lam + v[i, j]
                v[i, j] = v[i, j] * lam + coeffs[k, i, j]
    return v, d1, d2


@njit(cache=True)
def horner_value(coeffs, lam, reverse):
    d = coeffs.shape[0] - 1
    top = 0 if reverse else d
    v = coeffs[top].copy()
    for step in range(d - 1, -1, -1):
        k = d - step if reverse else step
        v = v * lam + coeffs[k]
    return v


@njit(cache=True)
def weight_sum(weights, r, reverse):
    """sum_i r**i w_i (or sum_i r**(d-i) w_i when ``reverse``) for real r >= 0."""
    d = weights.shape[0] - 1
    s = weights[0] if reverse else weights[d]
    for step in range(d - 1, -1, -1):
        k = d - step if reverse else step
        s = s * r + weights[k]
    return s


@njit(cache=True)
def scalar_horner3(a, lam, reverse):
    d = a.shape[0] - 1
    v = a[0] if reverse else a[d]
    d1 = 0j
    d2 = 0j
    for step in range(d - 1, -1, -1):
        k = d - step if reverse else step
        d2 = d2 * lam + 2.0 * d1
        d1 = d1 * lam + v
        v = v * lam + a[k]
    return v, d1, d2


# ---------------------------------------------------------------- public API


def _check_point(z: complex) -> complex:
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"evaluation point must be finite, got {z}")
    return z


def _finish(v, d1, d2, at_reversal: bool) -> EvalTriple:
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
        raise FloatingPointError("overflow while evaluating the matrix polynomial")
    return EvalTriple(v, d1, d2, at_reversal)


def eval_with_derivatives(P: MatrixPolynomial, lam: complex) -> EvalTriple:
    """P(lam), P'(lam), P''(lam) by Horner's rule.

    Intended for ``|lam| <= 1``; larger moduli should go through
    :func:`eval_reversal` to stay clear of overflow.
    """
    lam = _check_point(lam)
    return _finish(*horner3(P.coeffs, lam, False), False)


def eval_reversal(P: MatrixPolynomial, rho: complex) -> EvalTriple:
    """rP(rho) = sum_i rho**(d-i) A_i and its first two derivatives."""
    rho = _check_point(rho)
    return _finish(*horner3(P.coeffs, rho, True), True)


class CoefficientWeights:
    """Frobenius norms of the coefficients and the weight sums built from them."""

    def __init__(self, norms: np.ndarray):
        self.norms = np.ascontiguousarray(norms, dtype=np.float64)

    @property
    def d(self) -> int:
        return self.norms.shape[0] - 1

    def alpha(self, lam: complex) -> float:
        """sum_i |lam|**i ||A_i||_F"""
        return float(weight_sum(self.norms, abs(lam), False))

    def alpha_rev(self, rho: complex) -> float:
        """sum_i |rho|**(d-i) ||A_i||_F"""
        return float(weight_sum(self.norms, abs(rho), True))

    def at(self, lam: complex) -> float:
        """alpha for |lam| <= 1 and the reversal weight at 1/lam otherwise."""
        if abs(lam) <= 1.0:
            return self.alpha(lam)
        return self.alpha_rev(1.0 / lam)

    def __repr__(self):
        return f"CoefficientWeights({self.norms!r})"


def coefficient_weights(P: MatrixPolynomial) -> CoefficientWeights:
    return CoefficientWeights(np.linalg.norm(P.coeffs, axis=(1, 2)))
