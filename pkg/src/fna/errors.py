"""Exception types shared across the package."""

from __future__ import annotations


class FnaError(Exception):
    """Base class for all package errors."""


class NotPositiveDefiniteError(FnaError, ValueError):
    """Cholesky factorization met a nonpositive pivot.

    Attributes
    ----------
    index : int
        Zero-based pivot index at which the factorization broke down.
    pivot : float
        Value of the offending pivot (smallest Cholesky pivot seen).
    """

    def __init__(self, index: int, pivot: float, message: str | None = None):
        self.index = int(index)
        self.pivot = float(pivot)
        super().__init__(message or f"matrix not positive definite: pivot {self.pivot:.3e} at index {self.index}")


class ConvergenceError(FnaError, RuntimeError):
    """An iterative method exceeded its documented iteration cap."""


class AsymmetryError(FnaError, ValueError):
    """Input to a symmetric routine is not symmetric to tolerance."""


class OutOfRangeError(FnaError, ArithmeticError):
    """Requested quantity lies below the double-double computability floor."""


class RankDeficientError(FnaError, ValueError):
    """Plain least squares refused on a numerically rank-deficient matrix."""


class BreakdownError(FnaError, ArithmeticError):
    """Orthogonalization exhausted the span (stage index attached)."""

    def __init__(self, stage: int, norm: float):
        self.stage = int(stage)
        self.norm = float(norm)
        super().__init__(f"Stieltjes/Arnoldi breakdown at stage {stage}: norm {norm:.3e}")


class SingularMatrixError(FnaError, ZeroDivisionError):
    """Triangular factor with an exactly zero diagonal entry."""


class QuadratureError(FnaError, RuntimeError):
    """A quadrature-built quantity failed its resolution (doubling) check."""


class BoundViolationError(FnaError, AssertionError):
    """A certified inequality failed beyond its stated slack."""
