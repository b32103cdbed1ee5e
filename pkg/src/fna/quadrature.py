"""Quadrature rules and Gram-matrix assembly.

Continuous Gram matrices ``G_ij = int phi_i conj(phi_j) drho`` are built by
Gauss-Legendre quadrature (polynomial and generic dictionaries), by the
substitution ``x = 2t^2 - 1`` (sum frame, whose weighted entries carry a
square root at ``x = -1``) or in closed form (Fourier extension families).
Discrete Gram matrices come from sample sets.

The reference measure is a ``measure`` argument: ``"probability"`` (uniform
probability on the domain, the default) or ``"lebesgue"`` (plain ``dx``).
For the Fourier extension frame the Lebesgue version is exactly the prolate
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import xprec
from .dictionaries import (ArnoldiDict, Dictionary, FourierExtDict, FourierExtRealDict,
                           LegendreDict, MonomialDict, SumFrameDict)
from .errors import QuadratureError
from .xprec import DD

__all__ = [
    "QuadRule",
    "GramPair",
    "gauss_legendre",
    "gauss_legendre_interval",
    "gram_continuous",
    "gram_prolate",
    "gram_fourier_real",
    "gram_discrete",
    "synthesis_factor",
    "realify",
]

_DOUBLING_TOL = 1e-13


@dataclass(frozen=True)
class QuadRule:
    """Quadrature nodes and positive weights (``sum w = b - a``).

    ``nodes_dd``/``weights_dd`` hold the double-double versions when the rule
    was built with ``precision="dd"``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int | None = None
    interval: tuple[float, float] = (-1.0, 1.0)
    nodes_dd: DD | None = None
    weights_dd: DD | None = None

    def integrate(self, f) -> float:
        return np.sum(self.weights * f(self.nodes))


@dataclass(frozen=True)
class GramPair:
    """Continuous and discrete Gram matrices with their precision tag."""

    G_n: object
    G_nm: object
    precision: str = "double"


def _legendre_and_derivative(x, N):
    """P_N(x) and P_N'(x) by the three-term recurrence (double)."""
    p0 = np.ones_like(x)
    if N == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for k in range(1, N):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    dp = N * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def _legendre_and_derivative_dd(x: DD, N: int):
    p0 = xprec.dd_zeros(x.shape) + 1.0
    p1 = x.copy()
    for k in range(1, N):
        p0, p1 = p1, (x * p1 * float(2 * k + 1) - p0 * float(k)) / float(k + 1)
    dp = (x * p1 - p0) * float(N) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def _gauss_legendre_cached(N: int, precision: str):
    if N == 1:
        z = np.zeros(1)
        two = np.array([2.0])
        if precision == "dd":
            return z, two, xprec.dd(z), xprec.dd(two)
        return z, two, None, None
    k = np.arange(1, N)
    beta = k / np.sqrt(4.0 * k * k - 1.0)
    # Golub-Welsch: nodes are eigenvalues of the Jacobi matrix
    x = eigh_tridiagonal(np.zeros(N), beta, eigvals_only=True)
    # one Newton polish, then symmetrize
    p, dp = _legendre_and_derivative(x, N)
    x = x - p / dp
    x = 0.5 * (x - x[::-1])
    if N % 2:
        x[N // 2] = 0.0
    if precision == "dd":
        xd = xprec.dd(x)
        for _ in range(3):
            p, dp = _legendre_and_derivative_dd(xd, N)
            xd = xd - p / dp
        p, dp = _legendre_and_derivative_dd(xd, N)
        res = np.max(np.abs(p.hi / dp.hi))
        if res > 1e-29:
            raise QuadratureError(f"dd Gauss-Legendre Newton residual {res:.2e} for N={N}")
        # enforce exact symmetry of the dd nodes
        xd = (xd - xd[::-1]) * 0.5
        wd = 2.0 / ((1.0 - xd * xd) * dp * dp)
        wd = (wd + wd[::-1]) * 0.5
        return xd.to_float(), wd.to_float(), xd, wd
    p, dp = _legendre_and_derivative(x, N)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return x, w, None, None


def gauss_legendre(N: int, precision: str = "double") -> QuadRule:
    """N-point Gauss-Legendre rule for ``dx`` on [-1, 1].

    Nodes are the Golub-Welsch eigenvalues of the Legendre Jacobi matrix,
    polished by Newton's method on the three-term recurrence (three dd steps
    with a residual check when ``precision="dd"``).  Weights use
    ``2 / ((1 - x^2) P_N'(x)^2)``.  Exact for degree ``2N - 1``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if precision not in ("double", "dd"):
        raise ValueError("precision must be 'double' or 'dd'")
    x, w, xd, wd = _gauss_legendre_cached(int(N), precision)
    return QuadRule(nodes=x.copy(), weights=w.copy(), degree=2 * N - 1,
                    nodes_dd=xd, weights_dd=wd)


def gauss_legendre_interval(N: int, a: float, b: float, precision: str = "double") -> QuadRule:
    """Gauss-Legendre rule mapped affinely to ``[a, b]``."""
    r = gauss_legendre(N, precision)
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    nd = wd = None
    if r.nodes_dd is not None:
        nd = r.nodes_dd * half + mid
        wd = r.weights_dd * half
    return QuadRule(nodes=r.nodes * half + mid, weights=r.weights * half, degree=r.degree,
                    interval=(a, b), nodes_dd=nd, weights_dd=wd)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def gram_prolate(n: int, W: float, precision: str = "double"):
    """Prolate matrix ``sin(2 pi W (k-l)) / (pi (k-l))``, diagonal ``2W``.

    This is the Gram matrix of ``exp(2 pi i k x)`` under ``dx`` on
    ``[-W, W]``.  Entries are evaluated in mpmath and rounded to dd, so the
    double version is correctly rounded as well.  Any ``n >= 1`` is accepted
    (even sizes are convenient in tests).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < W < 0.5:
        raise ValueError("W must lie in (0, 1/2)")
    with mpmath.workdps(40):
        Wm = mpmath.mpf(W)
        vals = [2 * Wm] + [mpmath.sin(2 * mpmath.pi * Wm * d) / (mpmath.pi * d) for d in range(1, n)]
    t = xprec.dd_from_mpf(vals)
    k = np.arange(n)
    idx = np.abs(k[:, None] - k[None, :])
    G = t[idx]
    return G if precision == "dd" else G.to_float()


def gram_fourier_real(n: int, precision: str = "double"):
    """Closed-form Gram of the real Fourier extension family under dx/2.

    Uses ``S(c) = int_{-1}^{1} cos(c pi x/2) dx = 4 sin(c pi/2)/(c pi)``.
    """
    N = 2 * n + 1
    with mpmath.workdps(40):
        def S(c):
            if c == 0:
                return mpmath.mpf(2)
            return 4 * mpmath.sin(c * mpmath.pi / 2) / (c * mpmath.pi)

        Sv = {c: S(c) for c in range(0, 2 * n + 1)}
        M = [[mpmath.mpf(0)] * N for _ in range(N)]
        # index map: 0 -> const (cos 0), 2k-1 -> cos k, 2k -> sin k
        for i in range(N):
            ki, si = ((i + 1) // 2, i > 0 and i % 2 == 0)
            for j in range(N):
                kj, sj = ((j + 1) // 2, j > 0 and j % 2 == 0)
                if si != sj:
                    continue
                a, b = Sv[abs(ki - kj)], Sv[ki + kj]
                M[i][j] = (a - b) / 4 if si else (a + b) / 4
    G = xprec.dd_from_mpf(M)
    return G if precision == "dd" else G.to_float()


# ---------------------------------------------------------------------------
# quadrature-built Gram matrices
# ---------------------------------------------------------------------------

def _is_polynomial(d: Dictionary) -> bool:
    if isinstance(d, (LegendreDict, MonomialDict)):
        return True
    return isinstance(d, ArnoldiDict) and not d.complex_shift


def _default_nodes(d: Dictionary) -> int:
    if _is_polynomial(d):
        return d.count + 16
    return 2 * d.count + 32


def _gram_from_rule(d: Dictionary, rule: QuadRule, precision: str, scale: float):
    a, b = d.domain
    if rule.interval != (a, b):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        nodes = rule.nodes * half + mid
        w = rule.weights * half
        nd = rule.nodes_dd * half + mid if rule.nodes_dd is not None else None
        wd = rule.weights_dd * half if rule.weights_dd is not None else None
    else:
        nodes, w, nd, wd = rule.nodes, rule.weights, rule.nodes_dd, rule.weights_dd
    if precision == "dd":
        if nd is None:
            nd, wd = xprec.dd(nodes), xprec.dd(w)
        Phi = d.evaluate_dd(nd)
        if isinstance(Phi, tuple):
            return _dd_complex_gram(Phi[0], Phi[1], wd * scale)
        return xprec.dd_gram(Phi, wd * scale)
    Phi = d.evaluate(nodes)
    G = (Phi.conj().T * (w * scale)) @ Phi
    return 0.5 * (G + G.conj().T)


def _sumframe_gram(d: SumFrameDict, N: int, precision: str, scale: float):
    # x = 2 t^2 - 1 on t in [0, 1]; dx = 4 t dt
    r = gauss_legendre_interval(N, 0.0, 1.0, "dd" if precision == "dd" else "double")
    if precision == "dd":
        t = r.nodes_dd
        x = t * t * 2.0 - 1.0
        Phi = d.evaluate_sub_dd(x, t)
        return xprec.dd_gram(Phi, t * r.weights_dd * (4.0 * scale))
    t = r.nodes
    x = 2.0 * t * t - 1.0
    P = d.evaluate(x)
    P[:, d.half:] = P[:, :d.half] * t[:, None]  # weight equals t exactly
    G = (P.T * (4.0 * scale * t * r.weights)) @ P
    return 0.5 * (G + G.T)


def _dd_complex_gram(re: DD, im: DD, w) -> tuple[DD, DD]:
    Gr = xprec.dd_gram(re, w) + xprec.dd_gram(im, w)
    reW = re * w.reshape(-1, 1)
    imW = im * w.reshape(-1, 1)
    Gi = xprec.dd_matmul(reW.T, im) - xprec.dd_matmul(imW.T, re)
    Gi = (Gi - Gi.T) * 0.5
    return Gr, Gi


def gram_continuous(d: Dictionary, rule: QuadRule | None = None, precision: str = "double",
                    measure: str = "probability", check: bool = True, method: str = "auto"):
    """Continuous Gram matrix of a dictionary.

    Parameters
    ----------
    d : Dictionary
    rule : QuadRule, optional
        Quadrature rule on [-1, 1] (mapped to the domain).  Defaults to
        Gauss-Legendre with ``n + 16`` nodes for polynomial dictionaries and
        ``2n + 32`` otherwise.  Closed-form families ignore it.
    precision : {"double", "dd"}
    measure : {"probability", "lebesgue"}
        Uniform probability measure on the domain, or plain ``dx``.
    check : bool
        Run the doubling check (N against 2N nodes, double precision) on
        quadrature-built matrices.
    method : {"auto", "quadrature"}
        ``"quadrature"`` forces Gauss-Legendre assembly even for families
        with a closed form (used to cross-check the closed forms).

    Returns
    -------
    ndarray or DD
        Complex dictionaries in dd come back as a ``(real, imag)`` pair,
        except the Fourier extension frame whose Gram is real.
    """
    if measure not in ("probability", "lebesgue"):
        raise ValueError("measure must be 'probability' or 'lebesgue'")
    a, b = d.domain
    scale = 1.0 / (b - a) if measure == "probability" else 1.0
    if method not in ("auto", "quadrature"):
        raise ValueError("method must be 'auto' or 'quadrature'")
    closed = method == "auto"
    if closed and isinstance(d, FourierExtDict):
        G = gram_prolate(d.count, d.W, precision)
        return G * scale if scale != 1.0 else G
    if closed and isinstance(d, FourierExtRealDict):
        G = gram_fourier_real(d.n, precision)
        return G * (2.0 * scale) if measure == "lebesgue" else G
    if isinstance(d, SumFrameDict):
        N = d.count + 16 if rule is None else rule.nodes.size
        G = _sumframe_gram(d, N, precision, scale)
        if check:
            _doubling_check(_sumframe_gram(d, N, "double", scale),
                            _sumframe_gram(d, 2 * N, "double", scale), d)
        return G
    if rule is None:
        rule = gauss_legendre(_default_nodes(d), precision)
    elif precision == "dd" and rule.nodes_dd is None:
        rule = gauss_legendre(rule.nodes.size, "dd")
    G = _gram_from_rule(d, rule, precision, scale)
    if check:
        N = rule.nodes.size
        G1 = _gram_from_rule(d, gauss_legendre(N), "double", scale)
        G2 = _gram_from_rule(d, gauss_legendre(2 * N), "double", scale)
        _doubling_check(G1, G2, d)
    return G


def synthesis_factor(d: Dictionary, precision: str = "dd", measure: str = "probability",
                     rule: QuadRule | None = None):
    """Square-root factor ``A = diag(sqrt(w)) Phi`` with ``A^T A = G``.

    ``A`` samples the dictionary at the same quadrature nodes that
    :func:`gram_continuous` uses, so its singular values are those of the
    synthesis operator.  Working with ``A`` instead of ``G`` halves the
    exponent range needed for small singular values.  Real dictionaries only.
    """
    if d.is_complex:
        raise ValueError("synthesis_factor supports real dictionaries only")
    if measure not in ("probability", "lebesgue"):
        raise ValueError("measure must be 'probability' or 'lebesgue'")
    a, b = d.domain
    scale = 1.0 / (b - a) if measure == "probability" else 1.0
    dd = precision == "dd"
    if isinstance(d, SumFrameDict):
        N = d.count + 16 if rule is None else rule.nodes.size
        r = gauss_legendre_interval(N, 0.0, 1.0, "dd" if dd else "double")
        if dd:
            t = r.nodes_dd
            Phi = d.evaluate_sub_dd(t * t * 2.0 - 1.0, t)
            return Phi * (t * r.weights_dd * (4.0 * scale)).sqrt().reshape(-1, 1)
        t = r.nodes
        P = d.evaluate(2.0 * t * t - 1.0)
        P[:, d.half:] = P[:, :d.half] * t[:, None]
        return P * np.sqrt(4.0 * scale * t * r.weights)[:, None]
    N = _default_nodes(d) if rule is None else rule.nodes.size
    r = gauss_legendre_interval(N, a, b, "dd" if dd else "double")
    if dd:
        return d.evaluate_dd(r.nodes_dd) * (r.weights_dd * scale).sqrt().reshape(-1, 1)
    return d.evaluate(r.nodes) * np.sqrt(r.weights * scale)[:, None]


def _doubling_check(G1, G2, d):
    err = np.max(np.abs(G1 - G2))
    ref = max(1.0, np.max(np.abs(G2)))
    if err > _DOUBLING_TOL * ref:
        raise QuadratureError(f"Gram of {d.label} not resolved: N vs 2N differ by {err:.2e}")


def gram_discrete(d: Dictionary, samples, precision: str = "double"):
    """Discrete Gram ``A^* A`` with ``A[j, i] = sqrt(w_j/m) phi_i(x_j)``.

    ``samples`` needs ``points`` and ``weights`` attributes (a
    :class:`~fna.sampling.SampleSet`).  In dd, complex dictionaries return
    the realified ``2n x 2n`` matrix.
    """
    x = np.asarray(samples.points, dtype=float)
    w = np.asarray(samples.weights, dtype=float)
    m = x.size
    if m == 0:
        raise ValueError("empty sample set")
    if not d.contains(x):
        raise ValueError("sample points outside the dictionary domain")
    if precision == "dd":
        wd = xprec.dd(w) / float(m)
        Phi = d.evaluate_dd(x)
        if isinstance(Phi, tuple):
            Gr, Gi = _dd_complex_gram(Phi[0], Phi[1], wd)
            return realify((Gr, Gi))
        return xprec.dd_gram(Phi, wd)
    A = np.sqrt(w / m)[:, None] * d.evaluate(x)
    G = A.conj().T @ A
    return 0.5 * (G + G.conj().T)


def realify(G):
    """Real symmetric form ``[[Re G, -Im G], [Im G, Re G]]`` of a Hermitian G.

    Accepts a complex ndarray or a ``(real, imag)`` pair of :class:`DD`.
    Each eigenvalue of ``G`` appears twice in the result.
    """
    if isinstance(G, tuple):
        Gr, Gi = G
        n = Gr.shape[0]
        out = xprec.dd_zeros((2 * n, 2 * n))
        out[:n, :n] = Gr
        out[n:, n:] = Gr
        out[:n, n:] = -Gi
        out[n:, :n] = Gi
        return out
    G = np.asarray(G)
    return np.block([[G.real, -G.imag], [G.imag, G.real]])
