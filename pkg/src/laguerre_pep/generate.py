"""Seeded random problem ensembles.

Entries have real and imaginary parts drawn uniformly from [-1, 1].
"""

from __future__ import annotations

import re

import numpy as np

from .core import MatrixPolynomial, Structure

KINDS = (
    "general",
    "hessenberg",
    "hessenberg-graded",
    "tridiagonal",
    "scalar",
    "hermitian",
    "rank-deficient-ends",
)

_RDE = re.compile(r"rank-deficient-ends(?:\((\d+)\))?$")


def _uniform(rng, shape):
    return rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)


def _low_rank(rng, n, k):
    return _uniform(rng, (n, n - k)) @ _uniform(rng, (n - k, n))


def parse_kind(kind: str) -> tuple[str, int | None]:
    """Split ``rank-deficient-ends(k)`` into its name and k."""
    m = _RDE.match(kind)
    if m:
        return "rank-deficient-ends", int(m.group(1)) if m.group(1) else None
    if kind not in KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {', '.join(KINDS)}")
    return kind, None


def generate(kind: str, n: int, d: int, seed: int = 0, k: int | None = None) -> MatrixPolynomial:
    """A random matrix polynomial of the given kind.

    ``hessenberg-graded`` scales entry (i, j) above the diagonal by
    ``1 / (1 + j - i)``; plain random Hessenberg matrices become
    exponentially ill-conditioned as n grows. ``hermitian`` gives Hermitian
    coefficients with a positive definite ``A_d``. ``rank-deficient-ends``
    makes ``A_0`` and ``A_d`` of nullity ``k`` (default 1), also written
    ``rank-deficient-ends(k)``.
    """
    name, k_from_kind = parse_kind(kind)
    k = k if k is not None else (k_from_kind if k_from_kind is not None else 1)
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = np.random.default_rng(seed)
    label = f"{kind} n={n} d={d} seed={seed}"
    if name == "scalar":
        a = _uniform(rng, d + 1)
        while a[-1] == 0:
            a[-1] = _uniform(rng, 1)[0]
        return MatrixPolynomial(a.reshape(-1, 1, 1), Structure.SCALAR, label)
    A = _uniform(rng, (d + 1, n, n))
    structure = Structure.GENERAL
    if name in ("hessenberg", "hessenberg-graded"):
        A = np.triu(A, -1)
        if name == "hessenberg-graded":
            i, j = np.indices((n, n))
            A = A * np.where(j > i, 1.0 / np.maximum(1 + j - i, 1), 1.0)
        structure = Structure.HESSENBERG
    elif name == "tridiagonal":
        A = np.triu(np.tril(A, 1), -1)
        structure = Structure.TRIDIAGONAL
    elif name == "hermitian":
        A = 0.5 * (A + A.conj().transpose(0, 2, 1))
        B = A[-1]
        A[-1] = B @ B.conj().T / n + np.eye(n)
    elif name == "rank-deficient-ends":
        if not 1 <= k < n:
            raise ValueError(f"nullity k must satisfy 1 <= k < n, got k={k}, n={n}")
        A[0] = _low_rank(rng, n, k)
        A[-1] = _low_rank(rng, n, k)
    return MatrixPolynomial(A, structure, label)
