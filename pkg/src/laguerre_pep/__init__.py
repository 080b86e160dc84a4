"""Eigenvalues of matrix polynomials by Laguerre iteration with deflation."""

from .bounds import PelletBounds, pellet_bounds, pellet_bounds_for
from .core import EPS, MatrixPolynomial, NonRegularError, ScalarPolynomial, Structure
from .dense import EigenResult, solve_dense
from .driver import eigenvalues, solve
from .generate import generate
from .hyman import solve_structured
from .metrics import backward_error, condition_number
from .problem_io import ProblemFormatError, parse_problem, write_problem
from .scalar import solve_scalar
from .status import Kind, StopStatus

__all__ = [
    "EPS",
    "EigenResult",
    "Kind",
    "MatrixPolynomial",
    "NonRegularError",
    "PelletBounds",
    "ProblemFormatError",
    "ScalarPolynomial",
    "StopStatus",
    "Structure",
    "backward_error",
    "condition_number",
    "eigenvalues",
    "generate",
    "parse_problem",
    "pellet_bounds",
    "pellet_bounds_for",
    "solve",
    "solve_dense",
    "solve_scalar",
    "solve_structured",
    "write_problem",
]
