"""Regularized least-squares function approximation with redundant spanning sets.

Subpackages
-----------
linalg
    Double-precision QR, Jacobi SVD, symmetric and generalized eigensolvers.
xprec
    Double-double arithmetic and dd matrix kernels.
dictionaries
    Spanning sets (Legendre, monomial, sum frame, Fourier extension, Arnoldi).
quadrature
    Gauss rules and Gram matrices.
sampling
    Sample sets, Christoffel functions and sampling densities.
solvers
    Tikhonov, TSVD, QR-orthogonalized and Vandermonde-with-Arnoldi fits.
analysis
    Frame bounds, numerical dimension, stability constants and bound checks.
cli
    The ``fna`` experiment runner.
"""

from importlib.metadata import PackageNotFoundError, version

from . import analysis, dictionaries, errors, linalg, quadrature, sampling, solvers, xprec
from .dictionaries import from_name
from .errors import FnaError
from .linalg import EPS_DP

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "analysis",
    "dictionaries",
    "errors",
    "linalg",
    "quadrature",
    "sampling",
    "solvers",
    "xprec",
    "from_name",
    "FnaError",
    "EPS_DP",
    "__version__",
]
