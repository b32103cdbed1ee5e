"""Dense linear algebra in working (double) precision.

Matrices are plain numpy arrays in C (row-major) order, real or complex.
Factorizations return small frozen value types.  The SVD is a one-sided
(Hestenes) Jacobi iteration applied to the triangular factor of a
Householder QR, which keeps tiny singular values accurate relative to the
column scaling of the input; that matters for truncation thresholds close
to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (AsymmetryError, ConvergenceError, NotPositiveDefiniteError,
                     SingularMatrixError)

__all__ = [
    "SvdResult",
    "EigResult",
    "EPS_DP",
    "householder_qr",
    "svd",
    "sym_eig",
    "cholesky",
    "gen_sym_eig",
    "tsvd_apply",
    "tikhonov_apply",
    "skeel_cond",
]

#: Unit roundoff convention used throughout (machine epsilon of float64).
EPS_DP = float(np.finfo(float).eps)

_JACOBI_SWEEPS = 30


@dataclass(frozen=True)
class SvdResult:
    """Thin singular value decomposition ``A = U diag(S) V^*``.

    ``S`` is descending and nonnegative; ``U`` is (m, k) and ``V`` is (n, k)
    with ``k = min(m, n)``.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank_eps(self):
        """Number of singular values above ``EPS_DP * S[0]`` (the eps-rank)."""
        if self.S.size == 0:
            return 0
        return int(np.count_nonzero(self.S > EPS_DP * self.S[0]))


@dataclass(frozen=True)
class EigResult:
    """Eigenvalues in ascending order and matching eigenvector columns."""

    values: Any
    vectors: Any = None


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


# ---------------------------------------------------------------------------
# QR
# ---------------------------------------------------------------------------

def householder_qr(A) -> tuple[np.ndarray, np.ndarray]:
    """Thin Householder QR factorization.

    Parameters
    ----------
    A : array_like, shape (m, n), m >= n

    Returns
    -------
    Q : ndarray, shape (m, n)
        Orthonormal columns.
    R : ndarray, shape (n, n)
        Upper triangular.
    """
    A = _as_matrix(A)
    m, n = A.shape
    if m < n:
        raise ValueError(f"householder_qr needs rows >= cols, got {A.shape}")
    R = A.copy()
    vs = []
    for k in range(n):
        x = R[k:, k]
        alpha = float(_colnorm(x[:, None])[0])
        v = x.copy()
        if alpha == 0.0:
            vs.append(None)
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v[0] = x0 + phase * alpha
        v /= _colnorm(v[:, None])[0]
        R[k:, k:] -= 2.0 * np.outer(v, v.conj() @ R[k:, k:])
        R[k + 1:, k] = 0.0
        vs.append(v)
    Q = np.zeros((m, n), dtype=A.dtype)
    Q[np.arange(n), np.arange(n)] = 1.0
    for k in range(n - 1, -1, -1):
        v = vs[k]
        if v is None:
            continue
        Q[k:, :] -= 2.0 * np.outer(v, v.conj() @ Q[k:, :])
    return Q, np.triu(R[:n, :])


# ---------------------------------------------------------------------------
# SVD by one-sided Jacobi
# ---------------------------------------------------------------------------

def _pair_rounds(n: int):
    N = n + (n % 2)
    players = list(range(N))
    out = []
    for _ in range(N - 1):
        P, Q = [], []
        for i in range(N // 2):
            p, q = players[i], players[N - 1 - i]
            if p < n and q < n:
                P.append(min(p, q))
                Q.append(max(p, q))
        if P:
            out.append((np.array(P), np.array(Q)))
        players = [players[0], players[-1]] + players[1:-1]
    return out


def _colmax(X: np.ndarray) -> np.ndarray:
    s = np.max(np.abs(X), axis=0)
    return np.where(s > 0, s, 1.0)


def _colnorm(X: np.ndarray) -> np.ndarray:
    """Column 2-norms without intermediate under/overflow."""
    s = _colmax(X)
    return s * np.sqrt(np.sum(np.abs(X / s) ** 2, axis=0))


def _one_sided_jacobi(B: np.ndarray, tol: float, max_sweeps: int):
    """Orthogonalize the columns of square B by right rotations."""
    n = B.shape[1]
    V = np.eye(n, dtype=B.dtype)
    rounds = _pair_rounds(n)
    cplx = np.iscomplexobj(B)
    # columns cancelled to rounding level are retired; rotating them further
    # only cascades noise through ever smaller exponents
    dead = np.zeros(n, dtype=bool)
    for sweep in range(max_sweeps):
        rotated = False
        for P, Q in rounds:
            bp = B[:, P]
            bq = B[:, Q]
            # per-column scaling keeps the pair quantities clear of underflow
            sp = _colmax(bp)
            sq = _colmax(bq)
            alpha = np.sum(np.abs(bp / sp) ** 2, axis=0)
            beta = np.sum(np.abs(bq / sq) ** 2, axis=0)
            gamma = np.sum((bp / sp).conj() * (bq / sq), axis=0)
            g = np.abs(gamma)
            active = (g > tol * np.sqrt(alpha * beta)) & ~dead[P] & ~dead[Q]
            if not np.any(active):
                continue
            rotated = True
            gs = np.where(active, g, 1.0)
            r = sq / sp
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                zeta = (r * beta - alpha / r) / (2.0 * gs)
                t = np.sign(zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
                t = np.where(np.isinf(zeta), 0.5 / zeta, t)
            t = np.where(zeta == 0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.hypot(1.0, t)
            s = c * t
            if cplx:
                ph = np.where(active, gamma / gs, 1.0)
                bq = bq * ph.conj()
                vq = V[:, Q] * ph.conj()
            else:
                ph = np.where(active, np.sign(gamma), 1.0)
                ph = np.where(ph == 0, 1.0, ph)
                bq = bq * ph
                vq = V[:, Q] * ph
            vp = V[:, P]
            B[:, P] = c * bp - s * bq
            B[:, Q] = s * bp + c * bq
            V[:, P] = c * vp - s * vq
            V[:, Q] = s * vp + c * vq
            big = EPS_DP * np.maximum(sp * np.sqrt(alpha), sq * np.sqrt(beta))
            dead[P] |= active & (_colnorm(B[:, P]) <= big)
            dead[Q] |= active & (_colnorm(B[:, Q]) <= big)
        if not rotated:
            return B, V, dead
    raise ConvergenceError(f"one-sided Jacobi SVD did not converge in {max_sweeps} sweeps")


def _complete_orthonormal(U: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace columns not in ``keep`` by an orthonormal completion.

    A dropped column that is still mostly independent of the kept ones is
    re-orthogonalized rather than replaced.
    """
    m, k = U.shape
    if np.all(keep):
        return U
    basis = U[:, keep].copy()
    out = U.copy()

    def project(v):
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        return v

    for j in range(k):
        if keep[j]:
            continue
        v = project(U[:, j].copy())
        nv = np.linalg.norm(v)
        if not nv > 0.5:
            # the unit vector with the largest residual has norm >= sqrt((m-r)/m)
            E = project(np.eye(m, dtype=U.dtype))
            v = project(E[:, int(np.argmax(np.linalg.norm(E, axis=0)))])
            nv = np.linalg.norm(v)
        v = v / nv
        basis = np.column_stack([basis, v])
        out[:, j] = v
    return out


def _scale2(A: np.ndarray, e: int) -> np.ndarray:
    if np.iscomplexobj(A):
        return np.ldexp(A.real, e) + 1j * np.ldexp(A.imag, e)
    return np.ldexp(A, e)


def svd(A, *, max_sweeps: int = _JACOBI_SWEEPS, tol: float | None = None) -> SvdResult:
    """Thin SVD by Householder QR followed by one-sided Jacobi.

    Parameters
    ----------
    A : array_like, shape (m, n)
        Real or complex, finite.
    max_sweeps : int
        Jacobi sweep cap; exceeding it raises :class:`ConvergenceError`.
    tol : float, optional
        Column orthogonality threshold, default ``n * EPS_DP``.

    Returns
    -------
    SvdResult
    """
    A = _as_matrix(A)
    m, n = A.shape
    if m < n:
        r = svd(A.conj().T, max_sweeps=max_sweeps, tol=tol)
        return SvdResult(U=r.V, S=r.S, V=r.U)
    if n == 0:
        return SvdResult(np.zeros((m, 0), A.dtype), np.zeros(0), np.zeros((0, 0), A.dtype))
    # exact power-of-two scaling keeps squared column norms away from under/overflow
    amax = float(np.max(np.abs(A)))
    e = math.frexp(amax)[1] if amax > 0 else 0
    Q, R = householder_qr(_scale2(A, -e))
    if tol is None:
        tol = max(n, 1) * EPS_DP
    B, V, dead = _one_sided_jacobi(R.copy(), tol, max_sweeps)
    S = _colnorm(B)
    order = np.argsort(-S, kind="stable")
    S = S[order]
    B = B[:, order]
    V = V[:, order]
    dead = dead[order]
    nz = S > 0
    Ub = np.zeros_like(B)
    Ub[:, nz] = B[:, nz] / S[nz]
    keep = nz & ~dead
    Ub = _complete_orthonormal(Ub, keep)
    return SvdResult(U=Q @ Ub, S=np.ldexp(S, e), V=V)


# ---------------------------------------------------------------------------
# symmetric eigenproblems
# ---------------------------------------------------------------------------

def _check_hermitian(S: np.ndarray, tol: float) -> None:
    if S.shape[0] != S.shape[1]:
        raise ValueError("square matrix required")
    scale = np.max(np.abs(S), initial=0.0)
    if np.max(np.abs(S - S.conj().T), initial=0.0) > tol * max(scale, np.finfo(float).tiny):
        raise AsymmetryError("matrix is not symmetric/Hermitian to tolerance")


def sym_eig(S, *, tol: float = 1e-12) -> EigResult:
    """Eigen-decomposition of a symmetric or Hermitian matrix.

    The backend is LAPACK's symmetric QR driver (via ``numpy.linalg.eigh``)
    on the symmetrized input.

    Raises
    ------
    AsymmetryError
        If ``max|S - S^*| > tol * max|S|``.
    """
    S = _as_matrix(S)
    _check_hermitian(S, tol)
    H = 0.5 * (S + S.conj().T)
    w, v = np.linalg.eigh(H)
    return EigResult(values=w, vectors=v)


def cholesky(B) -> np.ndarray:
    """Lower Cholesky factor in double precision.

    Raises
    ------
    NotPositiveDefiniteError
        Carries the index and value of the first nonpositive pivot.
    """
    A = _as_matrix(B).copy()
    n = A.shape[0]
    L = np.zeros_like(A)
    for k in range(n):
        p = A[k, k].real
        if not p > 0:
            raise NotPositiveDefiniteError(k, p)
        d = np.sqrt(p)
        L[k, k] = d
        col = A[k + 1:, k] / d
        L[k + 1:, k] = col
        A[k + 1:, k + 1:] -= np.outer(col, col.conj())
    return L


def gen_sym_eig(A, B, *, fallback: str = "xprec", tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues of the definite pencil ``A v = lambda B v``, ascending.

    Reduction via ``B = L L^T`` and a symmetric eigensolve of
    ``L^{-1} A L^{-T}``.

    Parameters
    ----------
    A, B : array_like
        Symmetric; ``B`` positive definite.
    fallback : {"xprec", "shift", "raise"}
        What to do if ``B`` fails Cholesky in double.  ``"xprec"`` (default)
        redoes the reduction in double-double arithmetic (real input only);
        ``"shift"`` retries with ``B + u*trace(B)*I``.

    Raises
    ------
    NotPositiveDefiniteError
        With ``fallback="raise"`` when ``B`` is not numerically PD, and with
        ``"xprec"`` when ``B`` is not PD in double-double either.
    """
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape != B.shape:
        raise ValueError("A and B must have the same shape")
    _check_hermitian(A, tol)
    _check_hermitian(B, tol)
    try:
        L = cholesky(B)
    except NotPositiveDefiniteError:
        if fallback == "raise":
            raise
        if fallback == "shift":
            delta = EPS_DP * float(np.trace(B).real)
            L = cholesky(B + delta * np.eye(B.shape[0]))
        elif fallback == "xprec":
            from . import xprec
            Ld = xprec.dd_cholesky(B)
            Y = xprec.dd_solve_lower(Ld, A)
            C = xprec.dd_solve_lower(Ld, Y.T.copy())
            return np.sort(xprec.dd_sym_eig(C).values.to_float())
        else:
            raise ValueError(f"unknown fallback {fallback!r}")
    Y = solve_triangular(L, A, lower=True)
    C = solve_triangular(L, Y.conj().T, lower=True)
    return sym_eig(C, tol=max(tol, 1e-8)).values


# ---------------------------------------------------------------------------
# regularized inverses and conditioning
# ---------------------------------------------------------------------------

def tsvd_apply(s: SvdResult, eps: float, b) -> np.ndarray:
    """Truncated-SVD solution keeping singular values strictly above ``eps``.

    ``x = sum_{S_i > eps} V_i (U_i^* b) / S_i``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    b = np.asarray(b)
    if b.shape[0] != s.U.shape[0]:
        raise ValueError("shape mismatch between U and b")
    keep = s.S > eps
    coef = s.U[:, keep].conj().T @ b
    return s.V[:, keep] @ (coef / s.S[keep])


def tikhonov_apply(s: SvdResult, eps: float, b) -> np.ndarray:
    """Minimizer of ``||A x - b||^2 + eps^2 ||x||^2`` from an SVD of ``A``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    b = np.asarray(b)
    if b.shape[0] != s.U.shape[0]:
        raise ValueError("shape mismatch between U and b")
    f = s.S / (s.S**2 + eps**2)
    return s.V @ (f * (s.U.conj().T @ b))


def skeel_cond(R) -> float:
    """Skeel condition number ``|| |R^{-1}| |R| ||_inf`` of a triangular matrix."""
    R = _as_matrix(R)
    if np.any(np.diag(R) == 0):
        raise SingularMatrixError("triangular factor has a zero diagonal entry")
    lower = np.allclose(R, np.tril(R)) and not np.allclose(R, np.triu(R))
    Rinv = solve_triangular(R, np.eye(R.shape[0], dtype=R.dtype), lower=lower)
    M = np.abs(Rinv) @ np.abs(R)
    return float(np.max(np.sum(M, axis=1)))
