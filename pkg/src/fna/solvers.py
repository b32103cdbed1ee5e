"""Least-squares fits of sampled data in a dictionary.

The discrete system has rows ``A[j, i] = sqrt(w_j/m) phi_i(x_j)`` and data
``d_j = sqrt(w_j/m) f(x_j)`` (plus optional noise).  Solvers: plain least
squares (refused on numerically rank-deficient systems), Tikhonov, truncated
SVD, fitting in a QR-orthogonalized basis, and Vandermonde-with-Arnoldi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from . import xprec
from .dictionaries import ArnoldiDict, Dictionary, stieltjes_orthonormalize
from .errors import RankDeficientError
from .linalg import EPS_DP, householder_qr, skeel_cond, svd, tikhonov_apply, tsvd_apply
from .quadrature import QuadRule, gauss_legendre_interval

__all__ = [
    "ApproxResult",
    "FUNCTIONS",
    "runge910",
    "bessel_sum",
    "runge032",
    "default_eps",
    "build_system",
    "fit",
    "fit_qr_orthogonalized",
    "fit_vwa",
    "fit_dd_reference",
    "evaluate",
    "error_l2",
    "error_sup",
    "norm_l2",
]


# ---------------------------------------------------------------------------
# target functions
# ---------------------------------------------------------------------------

def runge910(x):
    """``1/(10 - 9x)``."""
    return 1.0 / (10.0 - 9.0 * np.asarray(x, dtype=float))


def bessel_sum(x):
    """``J_{1/2}(x+1) + 1/(x^2+1)`` with ``J_{1/2}(z) = sqrt(2/(pi z)) sin z``."""
    x = np.asarray(x, dtype=float)
    z = x + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.where(z > 0, np.sqrt(2.0 / (np.pi * np.where(z > 0, z, 1.0))) * np.sin(z), 0.0)
    return j + 1.0 / (x * x + 1.0)


def runge032(x):
    """``1/(1 - 0.32x)``."""
    return 1.0 / (1.0 - 0.32 * np.asarray(x, dtype=float))


#: CLI vocabulary of target functions.
FUNCTIONS: dict[str, Callable] = {
    "runge910": runge910,
    "bessel-sum": bessel_sum,
    "runge032": runge032,
}


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class ApproxResult:
    """Coefficients of a fit plus solver diagnostics.

    Attributes
    ----------
    coeffs : ndarray
        Expansion coefficients (length n').
    dictionary : Dictionary or None
        Functions the coefficients refer to.
    solver : str
    eps : float
        Regularization / truncation parameter (0 for plain LS).
    residual : float
        ``||d - A x||_2``.
    coeff_norm : float
        ``||x||_2``.
    info : dict
        Extra diagnostics (singular values kept, Skeel condition, ...).
    """

    coeffs: np.ndarray
    dictionary: Dictionary | None
    solver: str
    eps: float
    residual: float
    coeff_norm: float
    info: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)


def default_eps(A, s=None) -> float:
    """``10 * eps_dp * sigma_max(A)``."""
    smax = s.S[0] if s is not None else np.linalg.norm(A, 2)
    return 10.0 * EPS_DP * float(smax)


def build_system(d: Dictionary, samples, f, noise=None):
    """Assemble ``A`` and ``d`` from a dictionary, sample set and function."""
    x = samples.points
    if not d.contains(x):
        raise ValueError("sample points outside the dictionary domain")
    scale = np.sqrt(samples.weights / samples.m)
    A = scale[:, None] * d.evaluate(x)
    data = scale * np.asarray(f(x))
    if noise is not None:
        noise = np.asarray(noise)
        if noise.shape != data.shape:
            raise ValueError(f"noise shape {noise.shape} does not match data {data.shape}")
        data = data + noise
    return A, data


def fit(A, d, method: str = "tsvd", eps: float | str | None = "auto", *,
        dictionary: Dictionary | None = None, svd_result=None) -> ApproxResult:
    """Solve the discrete least-squares problem.

    Parameters
    ----------
    A : ndarray, shape (m, n')
    d : ndarray, shape (m,)
    method : {"ls", "tikhonov", "tsvd"}
    eps : float or "auto"
        Regularization parameter; ``"auto"`` (or None) means
        ``10 * eps_dp * sigma_max(A)``.  Ignored by ``ls``.
    dictionary : Dictionary, optional
        Recorded in the result so that it can be evaluated.

    Raises
    ------
    RankDeficientError
        ``method="ls"`` on a system with ``sigma_min <= eps_dp sigma_max``.
    """
    A = np.asarray(A)
    d = np.asarray(d)
    if A.shape[0] != d.shape[0]:
        raise ValueError("A and d have incompatible shapes")
    s = svd_result if svd_result is not None else svd(A)
    if method == "ls":
        if s.S.size < A.shape[1] or s.S[-1] <= EPS_DP * s.S[0]:
            raise RankDeficientError(
                "least squares refused: numerically rank-deficient system, use tikhonov or tsvd")
        x = tsvd_apply(s, 0.0, d)
        e = 0.0
    else:
        e = default_eps(A, s) if eps is None or eps == "auto" else float(eps)
        if not e > 0:
            raise ValueError(f"{method} needs eps > 0")
        if method == "tikhonov":
            x = tikhonov_apply(s, e, d)
        elif method == "tsvd":
            x = tsvd_apply(s, e, d)
        else:
            raise ValueError(f"unknown method {method!r}")
    r = float(np.linalg.norm(d - A @ x))
    info = {"sigma_max": float(s.S[0]) if s.S.size else 0.0,
            "sigma_min": float(s.S[-1]) if s.S.size else 0.0,
            "kept": int(np.count_nonzero(s.S > e))}
    return ApproxResult(coeffs=x, dictionary=dictionary, solver=method, eps=e,
                        residual=r, coeff_norm=float(np.linalg.norm(x)), info=info)


def fit_qr_orthogonalized(d: Dictionary, grid, samples, data, eps: float | None = None) -> ApproxResult:
    """Fit in a numerically orthogonalized basis, then map back through R.

    The dictionary is sampled on ``grid`` (scaled by ``1/sqrt(l)``) and
    factored ``Phi = Q R`` by Householder QR; the functions ``Phi R^{-1}``
    are orthonormal in the grid inner product.  Data are fitted in that
    basis (TSVD at ``eps`` if given, plain projection otherwise) and the
    coefficients mapped back by a triangular solve.  ``skeel_cond(R)`` is
    recorded in ``info``.

    Parameters
    ----------
    grid : array_like or None
        Orthogonalization grid; ``None`` uses the sample points.
    samples : SampleSet
    data : ndarray
        Sample data ``sqrt(w_j/m) f(x_j)``.
    """
    x = samples.points
    g = x if grid is None else np.asarray(grid, dtype=float)
    l = g.size
    Q, R = householder_qr(d.evaluate(g) / np.sqrt(l))
    info = {"skeel_cond": skeel_cond(R)}
    scale = np.sqrt(samples.weights / samples.m)
    same = grid is None or (g.shape == x.shape and np.array_equal(g, x)
                            and np.allclose(scale, 1.0 / np.sqrt(l)))
    if same:
        y = Q.conj().T @ data
    else:
        B = scale[:, None] * d.evaluate(x)
        B = solve_triangular(R, B.T, trans="T", lower=False).T  # B R^{-1}
        sB = svd(B)
        y = tsvd_apply(sB, eps or 0.0, data)
    coeffs = solve_triangular(R, y, lower=False)
    A = scale[:, None] * d.evaluate(x)
    r = float(np.linalg.norm(data - A @ coeffs))
    return ApproxResult(coeffs=coeffs, dictionary=d, solver="qr-orthogonalized",
                        eps=float(eps or 0.0), residual=r,
                        coeff_norm=float(np.linalg.norm(coeffs)), info=info)


def fit_vwa(shift, n: int, grid, data, *, offset: int = 0) -> ApproxResult:
    """Vandermonde with Arnoldi: discrete Stieltjes basis on ``grid`` + LS.

    Parameters
    ----------
    shift : str or callable
        Multiplication function (``"x"`` or ``"expi"`` for exp(i pi x/2)).
    n : int
        Number of Arnoldi functions.
    grid : array_like
        Orthogonalization and fitting grid (uniform weights ``1/l``).
    data : ndarray
        Function values on the grid (unscaled).
    offset : int
        Complex shifts only.  The approximant is ``Re(s^-offset sum c_k q_k)``
        with ``c`` the complex LS fit of ``s^offset data`` in the orthonormal
        columns ``q_k``.  ``offset = (n-1)//2`` with ``"expi"`` gives the
        two-sided Fourier extension of degree ``(n-1)//2``.

    Notes
    -----
    For complex shifts the coefficients refer to the real family of
    :class:`ArnoldiDict`; the complex ones are kept in ``info``.
    """
    grid = np.asarray(grid, dtype=float)
    l = grid.size
    if l < n:
        raise ValueError("grid must have at least n points")
    basis = stieltjes_orthonormalize(n, shift, (grid, np.full(l, 1.0 / l)))
    D = ArnoldiDict(basis, offset=offset) if offset else ArnoldiDict(basis)
    b = np.asarray(data) / np.sqrt(l)
    if not D.complex_shift:
        res = fit(D.evaluate(grid) / np.sqrt(l), b, "ls", dictionary=D)
        res.solver = "vwa"
        return res
    Qc = basis.Q / np.sqrt(l)
    zo = basis.shift(grid) ** offset if offset else np.ones(l)
    c = fit(Qc, b * zo, "ls").coeffs
    coeffs = np.concatenate([c.real, -c.imag]) if offset else np.concatenate([c.real, -c.imag[1:]])
    r = float(np.linalg.norm(b - ((Qc @ c) / zo).real))
    return ApproxResult(coeffs=coeffs, dictionary=D, solver="vwa", eps=0.0, residual=r,
                        coeff_norm=float(np.linalg.norm(c)), info={"complex_coeffs": c, "offset": offset})


def fit_dd_reference(d: Dictionary, samples, f, rel_threshold: float = 1e-28) -> ApproxResult:
    """Reference coefficients from a dd spectral solve of the normal equations.

    Eigen-decomposes ``G = A^T A`` in double-double and keeps eigenvalues
    above ``rel_threshold * lambda_max`` (a singular-value cut at
    ``sqrt(rel_threshold)`` relative).  Real dictionaries only.
    """
    A, data = build_system(d, samples, f)
    if np.iscomplexobj(A):
        raise ValueError("dd reference needs a real dictionary")
    G = xprec.dd_gram(A)
    rhs = xprec.dd_matmul(A.T, data)
    eig = xprec.dd_sym_eig(G, vectors=True)
    lam = eig.values.to_float()
    keep = lam > rel_threshold * lam[-1]
    V = eig.vectors[:, np.flatnonzero(keep)]
    y = xprec.dd_matmul(V.T, rhs) / eig.values[np.flatnonzero(keep)]
    x = xprec.dd_matmul(V, y).to_float()
    r = float(np.linalg.norm(data - A @ x))
    return ApproxResult(coeffs=x, dictionary=d, solver="dd-reference", eps=float(np.sqrt(rel_threshold * lam[-1])),
                        residual=r, coeff_norm=float(np.linalg.norm(x)), info={"kept": int(keep.sum())})


# ---------------------------------------------------------------------------
# evaluation and errors
# ---------------------------------------------------------------------------

def evaluate(res: ApproxResult, x) -> np.ndarray:
    """``sum_i x_i phi_i(x)``; complex results are returned as is."""
    if res.dictionary is None:
        raise ValueError("result carries no dictionary")
    return res.dictionary.evaluate(np.atleast_1d(x)) @ res.coeffs


def _default_rule(domain, N: int = 2000) -> QuadRule:
    return gauss_legendre_interval(N, domain[0], domain[1])


def norm_l2(f, domain=(-1.0, 1.0), rule: QuadRule | None = None) -> float:
    """``||f||`` in L2 of the uniform probability measure on ``domain``."""
    a, b = domain
    r = rule or _default_rule(domain)
    v = np.abs(np.asarray(f(r.nodes))) ** 2
    return float(np.sqrt(np.sum(r.weights * v) / (b - a)))


def error_l2(f, res: ApproxResult, rule: QuadRule | None = None) -> float:
    """L2 error under the dictionary's probability measure (Gauss rule)."""
    dom = res.dictionary.domain
    return norm_l2(lambda x: np.asarray(f(x)) - evaluate(res, x), dom, rule)


def error_sup(f, res: ApproxResult, grid=None) -> float:
    """Max error on ``grid`` (default 10001 equispaced points)."""
    a, b = res.dictionary.domain
    g = np.linspace(a, b, 10001) if grid is None else np.asarray(grid, dtype=float)
    return float(np.max(np.abs(np.asarray(f(g)) - evaluate(res, g))))
