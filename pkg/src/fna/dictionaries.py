"""Spanning sets (dictionaries) with pointwise evaluation.

A dictionary is a finite family of functions on an interval together with a
reference probability measure (uniform on the domain by default).  Every
dictionary can be evaluated in double precision and, for the Gram and
Christoffel machinery, in double-double precision.

Function indices are zero-based throughout: ``d.eval(0, x)`` is the first
function of the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import xprec
from .errors import BreakdownError
from .xprec import DD

__all__ = [
    "Dictionary",
    "LegendreDict",
    "MonomialDict",
    "SumFrameDict",
    "FourierExtDict",
    "FourierExtRealDict",
    "ArnoldiDict",
    "AugmentedDict",
    "ArnoldiBasis",
    "legendre_dict",
    "monomial_dict",
    "sumframe_dict",
    "fourier_ext_dict",
    "fourier_ext_real_dict",
    "arnoldi_dict",
    "stieltjes_orthonormalize",
    "arnoldi_eval",
    "chebyshev_points",
    "from_name",
    "SHIFTS",
]


def chebyshev_points(m: int) -> np.ndarray:
    """Chebyshev extreme points ``cos(j pi/(m-1))``, j = 0..m-1 (descending)."""
    if m < 1:
        raise ValueError("m must be positive")
    if m == 1:
        return np.array([1.0])
    return np.cos(np.arange(m) * np.pi / (m - 1))


class Dictionary:
    """Base class for a finite spanning set on an interval.

    Attributes
    ----------
    label : str
        Identifier (also the CLI name where applicable).
    count : int
        Number of functions n'.
    dim_hint : int
        Dimension n of the span in exact arithmetic.
    domain : tuple of float
        Interval ``(a, b)``.
    is_complex : bool
        Whether the functions are complex valued.
    """

    label: str = "dictionary"
    is_complex: bool = False

    def __init__(self, count: int, domain: tuple[float, float], dim_hint: int | None = None):
        self.count = int(count)
        self.domain = (float(domain[0]), float(domain[1]))
        self.dim_hint = int(dim_hint if dim_hint is not None else count)

    # measure -----------------------------------------------------------------
    @property
    def measure_density(self) -> float:
        """Density of the reference probability measure w.r.t. dx."""
        a, b = self.domain
        return 1.0 / (b - a)

    def contains(self, x, slack: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        w = slack * (b - a)
        return bool(np.all((x >= a - w) & (x <= b + w)))

    # evaluation --------------------------------------------------------------
    def evaluate(self, x) -> np.ndarray:
        """Matrix ``Phi[j, i] = phi_i(x_j)`` in double precision."""
        raise NotImplementedError

    def evaluate_dd(self, x):
        """Double-double evaluation.

        Returns a :class:`DD` of shape (len(x), count) for real
        dictionaries, or a ``(real, imag)`` pair for complex ones.
        """
        raise NotImplementedError

    def eval(self, i: int, x):
        """Single function ``phi_i`` (zero-based) at points ``x``."""
        if not 0 <= i < self.count:
            raise IndexError(f"index {i} out of range for {self.count} functions")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.evaluate(x)[:, i]

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def synthesize(self, coeffs, x) -> np.ndarray:
        """Evaluate ``sum_i c_i phi_i(x)``."""
        return self.evaluate(np.atleast_1d(x)) @ np.asarray(coeffs)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, count={self.count})"


# ---------------------------------------------------------------------------
# polynomial families on [-1, 1]
# ---------------------------------------------------------------------------

def _legendre_matrix(x: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal Legendre values sqrt(2k+1) P_k(x), k < n, under dx/2."""
    P = np.empty((x.size, n))
    if n == 0:
        return P
    P[:, 0] = 1.0
    if n > 1:
        P[:, 1] = x
    for k in range(1, n - 1):
        P[:, k + 1] = ((2 * k + 1) * x * P[:, k] - k * P[:, k - 1]) / (k + 1)
    return P * np.sqrt(2.0 * np.arange(n) + 1.0)


def _legendre_matrix_dd(x: DD, n: int) -> DD:
    m = x.size
    P = xprec.dd_zeros((m, n))
    if n == 0:
        return P
    P[:, 0] = 1.0
    if n > 1:
        P[:, 1] = x
    for k in range(1, n - 1):
        P[:, k + 1] = (x * P[:, k] * float(2 * k + 1) - P[:, k - 1] * float(k)) / float(k + 1)
    scale = xprec.DD(2.0 * np.arange(n) + 1.0).sqrt()
    return P * scale.reshape(1, n)


class LegendreDict(Dictionary):
    """Orthonormal Legendre polynomials ``sqrt(2i+1) P_i`` (zero-based i)."""

    label = "legendre"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        super().__init__(n, (-1.0, 1.0))

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _legendre_matrix(x, self.count)

    def evaluate_dd(self, x):
        return _legendre_matrix_dd(xprec.dd(x).reshape(-1), self.count)


class MonomialDict(Dictionary):
    """Monomials ``x**i``, i = 0..n-1, on [-1, 1]."""

    label = "monomial"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        super().__init__(n, (-1.0, 1.0))

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x[:, None] ** np.arange(self.count)[None, :]

    def evaluate_dd(self, x):
        x = xprec.dd(x).reshape(-1)
        out = xprec.dd_zeros((x.size, self.count))
        out[:, 0] = 1.0
        for k in range(1, self.count):
            out[:, k] = out[:, k - 1] * x
        return out


class SumFrameDict(Dictionary):
    """Legendre plus weighted Legendre: ``{phi_i} U {w phi_i}``.

    The weight is ``w(x) = sqrt((x+1)/2)``; the first ``n/2`` entries are
    orthonormal Legendre polynomials and the last ``n/2`` are the same
    polynomials times ``w``.
    """

    label = "sumframe"

    def __init__(self, n: int):
        if n < 2 or n % 2:
            raise ValueError("sumframe needs an even size n >= 2")
        super().__init__(n, (-1.0, 1.0))
        self.half = n // 2

    @staticmethod
    def weight(x):
        return np.sqrt((np.asarray(x, dtype=float) + 1.0) / 2.0)

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        P = _legendre_matrix(x, self.half)
        return np.hstack([P, self.weight(x)[:, None] * P])

    def evaluate_dd(self, x):
        x = xprec.dd(x).reshape(-1)
        t = ((x + 1.0) * 0.5).sqrt()
        return self.evaluate_sub_dd(x, t)

    def evaluate_sub_dd(self, x: DD, t: DD) -> DD:
        """dd evaluation at ``x`` with the weight ``t = w(x)`` supplied."""
        P = _legendre_matrix_dd(x, self.half)
        out = xprec.dd_zeros((x.size, self.count))
        out[:, :self.half] = P
        out[:, self.half:] = P * t.reshape(-1, 1)
        return out


# ---------------------------------------------------------------------------
# Fourier extension families
# ---------------------------------------------------------------------------

def _dd_trig_table(base_cos: DD, base_sin: DD, kmax: int):
    """cos(k a), sin(k a) for k = 0..kmax by angle addition in dd."""
    m = base_cos.size
    C = xprec.dd_zeros((m, kmax + 1))
    S = xprec.dd_zeros((m, kmax + 1))
    C[:, 0] = 1.0
    for k in range(1, kmax + 1):
        cprev, sprev = C[:, k - 1], S[:, k - 1]
        C[:, k] = cprev * base_cos - sprev * base_sin
        S[:, k] = sprev * base_cos + cprev * base_sin
    return C, S


class FourierExtDict(Dictionary):
    """Complex exponentials ``exp(2 pi i k x)`` on ``[-W, W]``.

    Frequencies are ``k = -(n-1)/2 .. (n-1)/2`` (n odd, 0 < W < 1/2).
    """

    label = "fourier-ext"
    is_complex = True

    def __init__(self, n: int, W: float):
        if n < 1 or n % 2 == 0:
            raise ValueError("fourier-ext needs an odd size n")
        if not 0.0 < W < 0.5:
            raise ValueError("W must lie in (0, 1/2)")
        super().__init__(n, (-W, W))
        self.W = float(W)
        self.freqs = np.arange(n) - (n - 1) // 2

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(2j * np.pi * x[:, None] * self.freqs[None, :])

    def evaluate_dd(self, x):
        x = xprec.dd(x).reshape(-1)
        c1, s1 = xprec.dd_cos_sin(lambda: 2 * mpmath.pi, x)
        K = (self.count - 1) // 2
        C, S = _dd_trig_table(c1, s1, K)
        re = xprec.dd_zeros((x.size, self.count))
        im = xprec.dd_zeros((x.size, self.count))
        for j, k in enumerate(self.freqs):
            re[:, j] = C[:, abs(k)]
            im[:, j] = S[:, abs(k)] if k >= 0 else -S[:, abs(k)]
        return re, im


class FourierExtRealDict(Dictionary):
    """Real Fourier extension from ``[-2, 2]`` restricted to ``[-1, 1]``.

    Functions: ``1, cos(pi x/2), sin(pi x/2), ..., cos(n pi x/2), sin(n pi x/2)``
    (2n+1 real functions).  This spans the real parts of
    ``sum_{k=0}^{n} c_k exp(i k pi x/2)`` with complex ``c_k``.
    """

    label = "fourier-ext-real"

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be >= 0")
        super().__init__(2 * n + 1, (-1.0, 1.0))
        self.n = int(n)

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.arange(1, self.n + 1)
        ang = 0.5 * np.pi * x[:, None] * k[None, :]
        out = np.empty((x.size, self.count))
        out[:, 0] = 1.0
        out[:, 1::2] = np.cos(ang)
        out[:, 2::2] = np.sin(ang)
        return out

    def evaluate_dd(self, x):
        x = xprec.dd(x).reshape(-1)
        c1, s1 = xprec.dd_cos_sin(lambda: mpmath.pi / 2, x)
        C, S = _dd_trig_table(c1, s1, self.n)
        out = xprec.dd_zeros((x.size, self.count))
        out[:, 0] = 1.0
        for k in range(1, self.n + 1):
            out[:, 2 * k - 1] = C[:, k]
            out[:, 2 * k] = S[:, k]
        return out


# ---------------------------------------------------------------------------
# Stieltjes / Arnoldi orthonormalization
# ---------------------------------------------------------------------------

#: Named shift functions for Arnoldi bases.
SHIFTS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "x": lambda x: np.asarray(x, dtype=float),
    "expi": lambda x: np.exp(0.5j * np.pi * np.asarray(x, dtype=float)),
}


@dataclass(frozen=True)
class ArnoldiBasis:
    """Orthonormal functions generated by the Stieltjes/Arnoldi recurrence.

    ``q_0 = 1/||1||`` and ``h[k,k-1] q_k = z q_{k-1} - sum_{j<k} h[j,k-1] q_j``
    with ``z = shift(x)``.

    Attributes
    ----------
    H : ndarray, shape (n, n-1)
        Hessenberg recurrence coefficients.
    q0 : complex or float
        Value of the constant first function.
    nodes, weights : ndarray
        Discrete inner product used to build the basis.
    shift_label : str
    Q : ndarray, shape (len(nodes), n)
        Basis values on the build grid.
    """

    H: np.ndarray
    q0: complex
    nodes: np.ndarray
    weights: np.ndarray
    shift_label: str
    shift: Callable = field(repr=False, compare=False, default=None)
    Q: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def size(self) -> int:
        return self.H.shape[0]


def _resolve_shift(shift):
    if isinstance(shift, str):
        if shift not in SHIFTS:
            raise ValueError(f"unknown shift {shift!r}; known: {sorted(SHIFTS)}")
        return shift, SHIFTS[shift]
    return getattr(shift, "__name__", "custom"), shift


def stieltjes_orthonormalize(n: int, shift, inner, *, breakdown_tol: float = 1e-14) -> ArnoldiBasis:
    """Build ``n`` orthonormal functions by the Stieltjes/Arnoldi procedure.

    Parameters
    ----------
    n : int
        Number of functions.
    shift : str or callable
        Multiplication operator ``z(x)``; a name from :data:`SHIFTS` or a
        vectorized function.
    inner : tuple (nodes, weights) or QuadRule
        Discrete inner product ``<f, g> = sum_j w_j conj(f_j) g_j``.  Use a
        quadrature rule for a continuous measure or a uniform grid for
        discrete orthogonalization.
    breakdown_tol : float
        Relative norm below which the new direction counts as zero.

    Returns
    -------
    ArnoldiBasis

    Raises
    ------
    BreakdownError
        If the span is exhausted before ``n`` functions are produced.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    label, z_fn = _resolve_shift(shift)
    if hasattr(inner, "nodes"):
        nodes, weights = np.asarray(inner.nodes, float), np.asarray(inner.weights, float)
    else:
        nodes, weights = (np.asarray(a, dtype=float) for a in inner)
    z = z_fn(nodes)
    dtype = complex if np.iscomplexobj(z) else float
    l = nodes.size
    Q = np.zeros((l, n), dtype=dtype)
    H = np.zeros((n, max(n - 1, 0)), dtype=dtype)
    one_norm = np.sqrt(np.sum(weights))
    q0 = 1.0 / one_norm
    Q[:, 0] = q0
    for k in range(1, n):
        v = z * Q[:, k - 1]
        start = np.sqrt(np.sum(weights * np.abs(v) ** 2))
        for _ in range(2):  # classical Gram-Schmidt, twice
            h = Q[:, :k].conj().T @ (weights * v)
            v = v - Q[:, :k] @ h
            H[:k, k - 1] += h
        nv = np.sqrt(np.sum(weights * np.abs(v) ** 2))
        if nv < breakdown_tol * start:
            raise BreakdownError(k, nv)
        H[k, k - 1] = nv
        Q[:, k] = v / nv
    return ArnoldiBasis(H=H, q0=q0, nodes=nodes, weights=weights,
                        shift_label=label, shift=z_fn, Q=Q)


def arnoldi_eval(basis: ArnoldiBasis, i, x):
    """Evaluate basis function(s) at new points via the stored recurrence.

    Parameters
    ----------
    basis : ArnoldiBasis
    i : int or None
        Zero-based index, or ``None`` for all functions (matrix output).
    x : array_like
    """
    n = basis.size
    if i is not None and not 0 <= i < n:
        raise IndexError(f"index {i} out of range for basis of size {n}")
    last = n if i is None else i + 1
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = basis.shift(x)
    dtype = complex if (np.iscomplexobj(z) or np.iscomplexobj(basis.H)) else float
    V = np.zeros((x.size, last), dtype=dtype)
    V[:, 0] = basis.q0
    for k in range(1, last):
        v = z * V[:, k - 1] - V[:, :k] @ basis.H[:k, k - 1]
        V[:, k] = v / basis.H[k, k - 1]
    return V if i is None else V[:, i]


class ArnoldiDict(Dictionary):
    """Dictionary view of an :class:`ArnoldiBasis`.

    Real shifts give a real dictionary with ``n`` functions.  Complex shifts
    (the Fourier-extension case) are exposed as the real family
    ``[Re q_0..q_{n-1}, Im q_1..q_{n-1}]`` of ``2n-1`` functions, matching the
    real-part approximation ``Re(sum c_k q_k)`` with complex ``c_k``.

    With ``offset > 0`` (complex shifts only) the functions are
    ``s(x)^(-offset) q_k(x)``, exposed as ``[Re, Im]`` of all ``n`` of them.
    For ``s = exp(i pi x/2)``, ``n = 2m+1`` and ``offset = m`` this spans the
    two-sided set ``exp(i k pi x/2)``, ``|k| <= m``.
    """

    label = "arnoldi"

    def __init__(self, basis: ArnoldiBasis, domain=(-1.0, 1.0), offset: int = 0):
        self.basis = basis
        self.complex_shift = np.iscomplexobj(basis.H) or np.iscomplexobj(basis.Q)
        if offset and not self.complex_shift:
            raise ValueError("offset needs a complex shift")
        self.offset = int(offset)
        if not self.complex_shift:
            cnt = basis.size
        else:
            cnt = 2 * basis.size if self.offset else 2 * basis.size - 1
        super().__init__(cnt, domain)
        self.label = f"arnoldi:{basis.shift_label}"

    def evaluate(self, x):
        V = arnoldi_eval(self.basis, None, x)
        if not self.complex_shift:
            return V
        if self.offset:
            z = self.basis.shift(np.atleast_1d(np.asarray(x, dtype=float)))
            V = V * (z ** (-self.offset))[:, None]
            return np.hstack([V.real, V.imag])
        return np.hstack([V.real, V[:, 1:].imag])


def arnoldi_dict(n: int, shift="x", grid=None) -> ArnoldiDict:
    """Arnoldi dictionary of ``n`` functions on a grid (uniform weights).

    The default grid is 1000 Chebyshev points of [-1, 1].
    """
    grid = chebyshev_points(1000) if grid is None else np.asarray(grid, dtype=float)
    w = np.full(grid.size, 1.0 / grid.size)
    return ArnoldiDict(stieltjes_orthonormalize(n, shift, (grid, w)))


class AugmentedDict(Dictionary):
    """A real dictionary extended by extra functions given as callables.

    The extra functions are only available in double precision;
    :meth:`evaluate_dd` lifts their values exactly.
    """

    def __init__(self, base: Dictionary, extra):
        if not isinstance(extra, (list, tuple)):
            extra = [extra]
        self.base = base
        self.extra = list(extra)
        super().__init__(base.count + len(self.extra), base.domain)
        self.label = f"{base.label}+{len(self.extra)}"

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cols = [np.asarray(g(x), dtype=float).reshape(-1) for g in self.extra]
        return np.hstack([self.base.evaluate(x), np.stack(cols, axis=1)])

    def evaluate_dd(self, x):
        x = np.atleast_1d(x.to_float() if isinstance(x, DD) else np.asarray(x, dtype=float))
        B = self.base.evaluate_dd(x)
        E = xprec.dd(np.stack([np.asarray(g(x), dtype=float).reshape(-1) for g in self.extra], axis=1))
        out = xprec.dd_zeros((x.size, self.count))
        out[:, :self.base.count] = B
        out[:, self.base.count:] = E
        return out


# ---------------------------------------------------------------------------
# factories
# ---------------------------------------------------------------------------

def legendre_dict(n: int) -> LegendreDict:
    return LegendreDict(n)


def monomial_dict(n: int) -> MonomialDict:
    return MonomialDict(n)


def sumframe_dict(n: int) -> SumFrameDict:
    return SumFrameDict(n)


def fourier_ext_dict(n: int, W: float) -> FourierExtDict:
    return FourierExtDict(n, W)


def fourier_ext_real_dict(n: int) -> FourierExtRealDict:
    return FourierExtRealDict(n)


def from_name(name: str, n: int, W: float = 0.25) -> Dictionary:
    """Build a dictionary from its CLI identifier.

    Known names: ``legendre``, ``monomial``, ``sumframe``, ``fourier-ext``,
    ``fourier-ext-real`` and ``arnoldi:<shift>`` with shift in
    :data:`SHIFTS`.
    """
    if name == "legendre":
        return LegendreDict(n)
    if name == "monomial":
        return MonomialDict(n)
    if name == "sumframe":
        return SumFrameDict(n)
    if name == "fourier-ext":
        return FourierExtDict(n, W)
    if name == "fourier-ext-real":
        return FourierExtRealDict(n)
    if name.startswith("arnoldi:"):
        return arnoldi_dict(n, name.split(":", 1)[1])
    raise ValueError(f"unknown dictionary {name!r}")
