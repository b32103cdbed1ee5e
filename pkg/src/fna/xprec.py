"""Double-double arithmetic and symmetric eigensolvers in extended precision.

A double-double (dd) number is an unevaluated sum ``hi + lo`` of two IEEE
doubles with ``|lo| <= ulp(hi)/2``, giving roughly 106 bits of mantissa
(about 31 significant decimal digits).  Everything here is vectorized over
numpy arrays: a :class:`DD` holds two float64 arrays of identical shape, so
scalars (``DDReal``) and matrices (``DDMatrix``) share one implementation.

The basic operations are built from the error-free transformations
``two_sum`` (Knuth) and ``two_prod`` (Dekker/Veltkamp splitting).  Each of
``+ - * / sqrt`` has relative error at most ``2**-104``.  Numpy never fuses
multiply-add, so the transformations are exact on every platform.

The eigensolver is a parallel (round-robin ordered) two-sided Jacobi method
carried out entirely in dd arithmetic, optionally preconditioned by a
double-precision eigenbasis that is re-orthogonalized in dd.  Jacobi keeps
eigenvalues accurate far below ``1e-16 * ||S||``, which is what makes spectra
near ``eps**2 ~ 1e-30`` usable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from .errors import AsymmetryError, ConvergenceError, NotPositiveDefiniteError

__all__ = [
    "DD",
    "DDReal",
    "DDMatrix",
    "U_DD",
    "two_sum",
    "two_prod",
    "dd",
    "dd_zeros",
    "dd_eye",
    "dd_sum",
    "dd_matmul",
    "dd_gram",
    "dd_cholesky",
    "dd_solve_lower",
    "dd_solve_upper",
    "dd_cholesky_solve",
    "dd_sym_eig",
    "dd_svd",
    "DDSvdResult",
    "dd_from_mpf",
    "dd_to_mpf",
    "dd_cos_sin",
    "dd_pi",
]

#: Documented per-operation relative error bound of the dd kernels.
U_DD = 2.0**-104

_SPLITTER = 134217729.0  # 2**27 + 1
_MAX_SWEEPS = 30
_CHUNK = 1 << 21  # elements per broadcasted product block


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------

def two_sum(a, b):
    """Return ``(s, e)`` with ``s = fl(a+b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    # requires |a| >= |b| (or a == 0)
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a*b)`` and ``p + e == a * b`` exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


# raw kernels on (hi, lo) pairs ------------------------------------------------

def _add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def _sub(ah, al, bh, bl):
    return _add(ah, al, -bh, -bl)


def _add_f(ah, al, b):
    s, e = two_sum(ah, b)
    return _quick_two_sum(s, e + al)


def _mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def _mul_f(ah, al, b):
    p, e = two_prod(ah, b)
    return _quick_two_sum(p, e + al * b)


def _div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _mul_f(bh, bl, q1)
    rh, rl = _sub(ah, al, ph, pl)
    q2 = rh / bh
    ph, pl = _mul_f(bh, bl, q2)
    rh, rl = _sub(rh, rl, ph, pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return _add_f(q1, q2, q3)


def _sqrt(ah, al):
    q = np.sqrt(ah)
    p, e = two_prod(q, q)
    rh, _ = _sub(ah, al, p, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(q > 0, rh / (2.0 * np.where(q > 0, q, 1.0)), 0.0)
    return _quick_two_sum(q, corr)


# ---------------------------------------------------------------------------
# the DD array type
# ---------------------------------------------------------------------------

class DD:
    """Array of double-double numbers.

    Parameters
    ----------
    hi : array_like
        Leading parts (or plain values when ``lo`` is omitted).
    lo : array_like, optional
        Trailing parts.  The pair is renormalized so that ``|lo| <= ulp(hi)/2``.

    Notes
    -----
    Arithmetic with floats, ints and numpy arrays promotes them exactly.
    Comparisons look at the sign of the dd difference.  ``float(x)`` and
    :meth:`to_float` round to the nearest double.
    """

    __slots__ = ("hi", "lo")
    __array_priority__ = 1000

    def __init__(self, hi, lo=None):
        if isinstance(hi, DD):
            h, l_ = hi.hi.copy(), hi.lo.copy()
        else:
            h = np.array(hi, dtype=float)
            if lo is None:
                l_ = np.zeros_like(h)
            else:
                l_ = np.array(lo, dtype=float)
                h, l_ = np.broadcast_arrays(h, l_)
                h, l_ = two_sum(h.copy(), l_.copy())
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(l_))):
            raise ValueError("DD entries must be finite")
        self.hi = h
        self.lo = l_

    @classmethod
    def _raw(cls, hi, lo) -> "DD":
        obj = cls.__new__(cls)
        obj.hi = np.asarray(hi, dtype=float)
        obj.lo = np.asarray(lo, dtype=float)
        return obj

    # -- container protocol --------------------------------------------------
    @property
    def shape(self):
        return self.hi.shape

    @property
    def ndim(self) -> int:
        return self.hi.ndim

    @property
    def size(self) -> int:
        return self.hi.size

    def __len__(self) -> int:
        return len(self.hi)

    def __getitem__(self, key) -> "DD":
        return DD._raw(self.hi[key], self.lo[key])

    def __setitem__(self, key, value) -> None:
        v = _as_dd(value)
        self.hi[key] = v.hi
        self.lo[key] = v.lo

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def copy(self) -> "DD":
        return DD._raw(self.hi.copy(), self.lo.copy())

    @property
    def T(self) -> "DD":
        return DD._raw(self.hi.T, self.lo.T)

    def reshape(self, *shape) -> "DD":
        return DD._raw(self.hi.reshape(*shape), self.lo.reshape(*shape))

    def diagonal(self) -> "DD":
        return DD._raw(np.diagonal(self.hi).copy(), np.diagonal(self.lo).copy())

    # -- conversion ----------------------------------------------------------
    def to_float(self) -> np.ndarray:
        """Nearest double (``hi + lo`` rounded, which equals ``hi``)."""
        return self.hi + self.lo

    def __float__(self) -> float:
        if self.hi.size != 1:
            raise TypeError("only size-1 DD arrays convert to float")
        return float(self.hi.reshape(-1)[0] + self.lo.reshape(-1)[0])

    def to_fraction(self) -> Fraction | list:
        """Exact rational value (scalar) or nested list of rationals."""
        if self.ndim == 0:
            return Fraction(float(self.hi)) + Fraction(float(self.lo))
        return [self[i].to_fraction() for i in range(len(self))]

    def __repr__(self) -> str:
        if self.ndim == 0:
            return f"DD({float(self.hi)!r}, {float(self.lo)!r})"
        return f"DD(shape={self.shape})"

    # -- arithmetic ------------------------------------------------------------
    def __neg__(self) -> "DD":
        return DD._raw(-self.hi, -self.lo)

    def __pos__(self) -> "DD":
        return self

    def __abs__(self) -> "DD":
        sgn = np.where(self.hi < 0, -1.0, 1.0)
        return DD._raw(sgn * self.hi, sgn * self.lo)

    def __add__(self, other) -> "DD":
        if _is_plain(other):
            b = np.asarray(other, dtype=float)
            return DD._raw(*_add_f(self.hi, self.lo, b))
        o = _as_dd(other)
        return DD._raw(*_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other) -> "DD":
        return self + (-_as_dd(other))

    def __rsub__(self, other) -> "DD":
        return _as_dd(other) + (-self)

    def __mul__(self, other) -> "DD":
        if _is_plain(other):
            b = np.asarray(other, dtype=float)
            return DD._raw(*_mul_f(self.hi, self.lo, b))
        o = _as_dd(other)
        return DD._raw(*_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        o = _as_dd(other)
        if np.any(o.hi == 0):
            raise ZeroDivisionError("DD division by zero")
        return DD._raw(*_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other) -> "DD":
        return _as_dd(other) / self

    def __pow__(self, k: int) -> "DD":
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = dd_ones(self.shape)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sqrt(self) -> "DD":
        if np.any(self.hi < 0):
            raise ValueError("sqrt of negative DD value")
        return DD._raw(*_sqrt(self.hi, self.lo))

    def square(self) -> "DD":
        return self * self

    def __matmul__(self, other) -> "DD":
        return dd_matmul(self, other)

    def __rmatmul__(self, other) -> "DD":
        return dd_matmul(other, self)

    # -- comparisons (elementwise, by sign of the difference) ---------------
    def _cmp(self, other):
        d = self - _as_dd(other)
        return d.hi

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def sum(self, axis: int = 0) -> "DD":
        return dd_sum(self, axis=axis)


#: Scalar and matrix aliases; both are :class:`DD` arrays.
DDReal = DD
DDMatrix = DD


def _is_plain(x) -> bool:
    return isinstance(x, (float, int, np.floating, np.integer)) or (
        isinstance(x, np.ndarray) and x.dtype.kind in "fiu")


def _as_dd(x) -> DD:
    if isinstance(x, DD):
        return x
    if isinstance(x, Fraction):
        return dd_from_mpf(mpmath.mpf(x.numerator) / x.denominator)
    return DD(x)


def dd(x, lo=None) -> DD:
    """Promote ``x`` (float, array, mpmath value or DD) to :class:`DD`."""
    if lo is not None:
        return DD(x, lo)
    if isinstance(x, (mpmath.mpf, str)):
        return dd_from_mpf(x)
    return _as_dd(x)


def dd_zeros(shape) -> DD:
    return DD._raw(np.zeros(shape), np.zeros(shape))


def dd_ones(shape) -> DD:
    return DD._raw(np.ones(shape), np.zeros(shape))


def dd_eye(n: int) -> DD:
    return DD._raw(np.eye(n), np.zeros((n, n)))


# ---------------------------------------------------------------------------
# conversions with mpmath
# ---------------------------------------------------------------------------

def dd_from_mpf(values) -> DD:
    """Round mpmath numbers (scalar or nested sequence) to dd."""
    arr = np.asarray(values, dtype=object)
    hi = np.empty(arr.shape)
    lo = np.empty(arr.shape)
    with mpmath.workdps(40):
        for idx, v in np.ndenumerate(arr):
            v = mpmath.mpf(v)
            h = float(v)
            hi[idx] = h
            lo[idx] = float(v - h)
    return DD._raw(hi, lo)


def dd_to_mpf(x: DD):
    """Exact conversion to mpmath (scalar) or object array of mpf."""
    with mpmath.workdps(40):
        if x.ndim == 0:
            return mpmath.mpf(float(x.hi)) + mpmath.mpf(float(x.lo))
        out = np.empty(x.shape, dtype=object)
        for idx in np.ndindex(x.shape):
            out[idx] = mpmath.mpf(float(x.hi[idx])) + mpmath.mpf(float(x.lo[idx]))
        return out


def dd_pi() -> DD:
    return dd_from_mpf(mpmath.pi)


def dd_cos_sin(scale, x) -> tuple[DD, DD]:
    """``cos(scale*x)`` and ``sin(scale*x)`` correctly rounded to dd.

    ``scale`` is taken exactly as an mpmath expression (e.g. ``2*pi``); the
    evaluation runs in mpmath at 40 digits, one point at a time.
    """
    xs = _as_dd(x)
    c = np.empty(xs.shape, dtype=object)
    s = np.empty(xs.shape, dtype=object)
    with mpmath.workdps(40):
        a = scale() if callable(scale) else mpmath.mpf(scale)
        for idx in np.ndindex(xs.shape):
            t = a * (mpmath.mpf(float(xs.hi[idx])) + mpmath.mpf(float(xs.lo[idx])))
            c[idx] = mpmath.cos(t)
            s[idx] = mpmath.sin(t)
    return dd_from_mpf(c), dd_from_mpf(s)


# ---------------------------------------------------------------------------
# reductions and products
# ---------------------------------------------------------------------------

def _tree_sum(h, l_):
    # pairwise reduction along axis 0
    while h.shape[0] > 1:
        if h.shape[0] % 2:
            pad = np.zeros((1,) + h.shape[1:])
            h = np.concatenate([h, pad])
            l_ = np.concatenate([l_, pad])
        h, l_ = _add(h[0::2], l_[0::2], h[1::2], l_[1::2])
    return h[0], l_[0]


def dd_sum(x, axis: int = 0) -> DD:
    """Pairwise dd sum along ``axis``."""
    x = _as_dd(x)
    h = np.moveaxis(x.hi, axis, 0)
    l_ = np.moveaxis(x.lo, axis, 0)
    if h.shape[0] == 0:
        return dd_zeros(h.shape[1:])
    return DD._raw(*_tree_sum(h, l_))


def _prod_parts(a, b):
    """Elementwise dd product of broadcastable operands (float or DD)."""
    if isinstance(a, DD) and isinstance(b, DD):
        return _mul(a.hi, a.lo, b.hi, b.lo)
    if isinstance(a, DD):
        return _mul_f(a.hi, a.lo, b)
    if isinstance(b, DD):
        return _mul_f(b.hi, b.lo, a)
    return two_prod(a, b)


def _T(a):
    return a.T if isinstance(a, DD) else np.asarray(a).T


def _rows(a, sl):
    return a[sl]


def dd_matmul(A, B) -> DD:
    """Matrix product ``A @ B`` with dd accumulation.

    Either operand may be a float array (its entries are then taken exactly)
    or a :class:`DD`.  Products are formed exactly or in dd and summed
    pairwise, so the result is accurate to a few dd ulps of ``|A||B|``.
    """
    a_vec = (A.ndim if isinstance(A, DD) else np.ndim(A)) == 1
    b_vec = (B.ndim if isinstance(B, DD) else np.ndim(B)) == 1
    if not isinstance(A, DD):
        A = np.asarray(A, dtype=float)
    if not isinstance(B, DD):
        B = np.asarray(B, dtype=float)
    if a_vec:
        A = A.reshape(1, -1)
    if b_vec:
        B = B.reshape(-1, 1)
    m, k = A.shape
    k2, n = B.shape
    if k != k2:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    out_h = np.empty((m, n))
    out_l = np.empty((m, n))
    if k == 0:
        out_h[:] = 0.0
        out_l[:] = 0.0
    else:
        At = _T(A)  # (k, m)
        rows = max(1, _CHUNK // max(1, k * n))
        for r0 in range(0, m, rows):
            a = At[:, r0:r0 + rows]
            a = a.reshape(a.shape + (1,)) if isinstance(a, DD) else a[:, :, None]
            b = B.reshape(k, 1, n) if isinstance(B, DD) else B[:, None, :]
            ph, pl = _prod_parts(a, b)
            h, l_ = _tree_sum(ph, pl)
            out_h[r0:r0 + rows] = h
            out_l[r0:r0 + rows] = l_
    res = DD._raw(out_h, out_l)
    if a_vec and b_vec:
        return res.reshape(())
    if a_vec:
        return res.reshape(n)
    if b_vec:
        return res.reshape(m)
    return res


def dd_gram(B, weights=None) -> DD:
    """Symmetric ``B^T diag(weights) B`` with dd accumulation.

    Parameters
    ----------
    B : ndarray or DD, shape (m, n)
        Real sample matrix.
    weights : array_like or DD, optional
        Row weights; defaults to ones.
    """
    if weights is None:
        Bw = B
    else:
        w = weights if isinstance(weights, DD) else np.asarray(weights, dtype=float)
        w = w.reshape(-1, 1)
        if isinstance(B, DD) or isinstance(w, DD):
            Bw = DD._raw(*_prod_parts(B if isinstance(B, DD) else np.asarray(B, float), w))
        else:
            Bw = DD._raw(*two_prod(np.asarray(B, float), w))
    G = dd_matmul(_T(Bw), B)
    return _symmetrize(G)


def _symmetrize(G: DD) -> DD:
    h, l_ = _add(G.hi, G.lo, G.hi.T, G.lo.T)
    return DD._raw(0.5 * h, 0.5 * l_)


# ---------------------------------------------------------------------------
# Cholesky and triangular solves
# ---------------------------------------------------------------------------

def dd_cholesky(S, shift=0.0) -> DD:
    """Lower Cholesky factor of ``S + shift*I`` in dd arithmetic.

    Raises
    ------
    NotPositiveDefiniteError
        On the first nonpositive pivot; carries its index and value.
    """
    A = _as_dd(S).copy()
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix required")
    sh = _as_dd(shift)
    if np.any(sh.hi != 0) or np.any(sh.lo != 0):
        i = np.arange(n)
        dh, dl = _add(A.hi[i, i], A.lo[i, i], sh.hi, sh.lo)
        A.hi[i, i] = dh
        A.lo[i, i] = dl
    Lh = np.zeros((n, n))
    Ll = np.zeros((n, n))
    for k in range(n):
        ph, pl = A.hi[k, k], A.lo[k, k]
        if not ph > 0:
            raise NotPositiveDefiniteError(k, ph + pl)
        dh, dl = _sqrt(np.array(ph), np.array(pl))
        Lh[k, k], Ll[k, k] = dh, dl
        if k + 1 < n:
            ch, cl = _div(A.hi[k + 1:, k], A.lo[k + 1:, k], dh, dl)
            Lh[k + 1:, k], Ll[k + 1:, k] = ch, cl
            oh, ol = _mul(ch[:, None], cl[:, None], ch[None, :], cl[None, :])
            sh_, sl_ = _sub(A.hi[k + 1:, k + 1:], A.lo[k + 1:, k + 1:], oh, ol)
            A.hi[k + 1:, k + 1:] = sh_
            A.lo[k + 1:, k + 1:] = sl_
    return DD._raw(Lh, Ll)


def dd_solve_lower(L: DD, B) -> DD:
    """Solve ``L X = B`` by forward substitution (L lower triangular)."""
    X = _as_dd(B).copy()
    vec = X.ndim == 1
    if vec:
        X = X.reshape(-1, 1)
    n = L.shape[0]
    for k in range(n):
        xh, xl = _div(X.hi[k], X.lo[k], L.hi[k, k], L.lo[k, k])
        X.hi[k], X.lo[k] = xh, xl
        if k + 1 < n:
            ph, pl = _mul(L.hi[k + 1:, k, None], L.lo[k + 1:, k, None], xh[None, :], xl[None, :])
            X.hi[k + 1:], X.lo[k + 1:] = _sub(X.hi[k + 1:], X.lo[k + 1:], ph, pl)
    return X.reshape(-1) if vec else X


def dd_solve_upper(U: DD, B) -> DD:
    """Solve ``U X = B`` by back substitution (U upper triangular)."""
    X = _as_dd(B).copy()
    vec = X.ndim == 1
    if vec:
        X = X.reshape(-1, 1)
    n = U.shape[0]
    for k in range(n - 1, -1, -1):
        xh, xl = _div(X.hi[k], X.lo[k], U.hi[k, k], U.lo[k, k])
        X.hi[k], X.lo[k] = xh, xl
        if k > 0:
            ph, pl = _mul(U.hi[:k, k, None], U.lo[:k, k, None], xh[None, :], xl[None, :])
            X.hi[:k], X.lo[:k] = _sub(X.hi[:k], X.lo[:k], ph, pl)
    return X.reshape(-1) if vec else X


def dd_cholesky_solve(S, shift, rhs, *, factor: DD | None = None) -> DD:
    """Solve ``(S + shift*I) x = rhs`` via dd Cholesky.

    ``rhs`` may be a vector or a matrix of right-hand sides.  A precomputed
    lower factor can be passed as ``factor`` to skip the factorization.
    """
    L = factor if factor is not None else dd_cholesky(S, shift)
    y = dd_solve_lower(L, rhs)
    return dd_solve_upper(L.T.copy(), y)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------

def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint pair schedule covering all index pairs once per sweep."""
    N = n + (n % 2)
    players = list(range(N))
    rounds = []
    for _ in range(N - 1):
        P, Q = [], []
        for i in range(N // 2):
            p, q = players[i], players[N - 1 - i]
            if p < n and q < n:
                P.append(min(p, q))
                Q.append(max(p, q))
        rounds.append((np.array(P, dtype=int), np.array(Q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _dd_orthonormalize(Q0: np.ndarray) -> DD:
    """Polish a nearly orthogonal double matrix to dd orthogonality."""
    n = Q0.shape[1]
    E = dd_matmul(Q0.T, Q0) - np.eye(n)
    M = dd_eye(n) - E * 0.5 + dd_matmul(E, E) * 0.375
    return dd_matmul(Q0, M)


def _check_symmetric(S: DD, tol: float) -> None:
    scale = float(np.max(np.abs(S.hi))) if S.size else 0.0
    dh, dl = _sub(S.hi, S.lo, S.hi.T, S.lo.T)
    if np.max(np.abs(dh), initial=0.0) > tol * max(scale, np.finfo(float).tiny):
        raise AsymmetryError("matrix is not symmetric to dd tolerance")


def _rotation(app_h, app_l, aqq_h, aqq_l, apq_h, apq_l, active):
    """Jacobi rotation ``(c, s, t)`` annihilating ``apq`` (dd components)."""
    den_h = np.where(active, apq_h, 1.0)
    den_l = np.where(active, apq_l, 0.0)
    dh, dl = _sub(aqq_h, aqq_l, app_h, app_l)
    th, tl = _div(dh, dl, 2.0 * den_h, 2.0 * den_l)
    # t = sign(theta) / (|theta| + sqrt(theta^2 + 1))
    sgn = np.where(th < 0, -1.0, 1.0)
    ath, atl = sgn * th, sgn * tl
    big = ath > 1e60
    ath_c = np.where(big, 1.0, ath)
    atl_c = np.where(big, 0.0, atl)
    qh, ql = _mul(ath_c, atl_c, ath_c, atl_c)
    qh, ql = _add_f(qh, ql, 1.0)
    rh, rl = _sqrt(qh, ql)
    rh, rl = _add(rh, rl, ath_c, atl_c)
    tnh, tnl = _div(sgn, np.zeros_like(sgn), rh, rl)
    inv2h, inv2l = _div(sgn, np.zeros_like(sgn), 2.0 * np.where(big, ath, 1.0), 2.0 * np.where(big, atl, 0.0))
    tnh = np.where(active, np.where(big, inv2h, tnh), 0.0)
    tnl = np.where(active, np.where(big, inv2l, tnl), 0.0)
    # c = 1/sqrt(1+t^2), s = t c
    uh, ul = _mul(tnh, tnl, tnh, tnl)
    uh, ul = _add_f(uh, ul, 1.0)
    uh, ul = _sqrt(uh, ul)
    ch, cl = _div(np.ones_like(uh), np.zeros_like(uh), uh, ul)
    sh, sl = _mul(tnh, tnl, ch, cl)
    return ch, cl, sh, sl, tnh, tnl


def _jacobi(A: DD, V: DD | None, max_sweeps: int, tol_abs: float) -> int:
    n = A.shape[0]
    rounds = _round_robin(n)
    Ah, Al = A.hi, A.lo
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        for P, Q in rounds:
            if P.size == 0:
                continue
            app_h, app_l = Ah[P, P], Al[P, P]
            aqq_h, aqq_l = Ah[Q, Q], Al[Q, Q]
            apq_h, apq_l = Ah[P, Q], Al[P, Q]
            mag = np.abs(apq_h)
            active = (mag > U_DD * np.sqrt(np.abs(app_h * aqq_h))) & (mag > tol_abs)
            if not np.any(active):
                continue
            rotated += int(np.count_nonzero(active))
            ch, cl, sh, sl, tnh, tnl = _rotation(app_h, app_l, aqq_h, aqq_l, apq_h, apq_l, active)
            # diagonal updates from pre-rotation values
            xh, xl = _mul(tnh, tnl, apq_h, apq_l)
            new_pp = _sub(app_h, app_l, xh, xl)
            new_qq = _add(aqq_h, aqq_l, xh, xl)
            # columns: A <- A J
            _rotate_cols(Ah, Al, P, Q, ch, cl, sh, sl)
            # rows: A <- J^T A
            _rotate_rows(Ah, Al, P, Q, ch, cl, sh, sl)
            if V is not None:
                _rotate_cols(V.hi, V.lo, P, Q, ch, cl, sh, sl)
            Ah[P, P], Al[P, P] = new_pp
            Ah[Q, Q], Al[Q, Q] = new_qq
            Ah[P, Q] = 0.0
            Al[P, Q] = 0.0
            Ah[Q, P] = 0.0
            Al[Q, P] = 0.0
        if rotated == 0:
            return sweep
    raise ConvergenceError(f"dd Jacobi did not converge in {max_sweeps} sweeps")


def _rotate_cols(Mh, Ml, P, Q, ch, cl, sh, sl):
    ph, pl = Mh[:, P], Ml[:, P]
    qh, ql = Mh[:, Q], Ml[:, Q]
    a = _mul(ph, pl, ch, cl)
    b = _mul(qh, ql, sh, sl)
    c = _mul(ph, pl, sh, sl)
    d = _mul(qh, ql, ch, cl)
    Mh[:, P], Ml[:, P] = _sub(*a, *b)
    Mh[:, Q], Ml[:, Q] = _add(*c, *d)


def _rotate_rows(Mh, Ml, P, Q, ch, cl, sh, sl):
    ch, cl, sh, sl = ch[:, None], cl[:, None], sh[:, None], sl[:, None]
    ph, pl = Mh[P, :], Ml[P, :]
    qh, ql = Mh[Q, :], Ml[Q, :]
    a = _mul(ph, pl, ch, cl)
    b = _mul(qh, ql, sh, sl)
    c = _mul(ph, pl, sh, sl)
    d = _mul(qh, ql, ch, cl)
    Mh[P, :], Ml[P, :] = _sub(*a, *b)
    Mh[Q, :], Ml[Q, :] = _add(*c, *d)


def dd_sym_eig(S, vectors: bool = False, *, precondition: bool = True,
               max_sweeps: int = _MAX_SWEEPS, sym_tol: float = 1e-26):
    """Eigen-decomposition of a symmetric matrix in dd arithmetic.

    Parameters
    ----------
    S : DD or ndarray, shape (n, n)
        Symmetric matrix (checked to ``sym_tol`` relative).
    vectors : bool
        Also accumulate eigenvectors.
    precondition : bool
        Start from a double-precision eigenbasis polished to dd
        orthogonality; Jacobi then only has to clean up.
    max_sweeps : int
        Sweep cap (default 30); exceeding it raises.

    Returns
    -------
    EigResult
        ``values`` ascending as a 1-D :class:`DD`; ``vectors`` a :class:`DD`
        matrix (columns) or ``None``.

    Raises
    ------
    AsymmetryError, ConvergenceError
    """
    from .linalg import EigResult

    S = _as_dd(S)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("square matrix required")
    _check_symmetric(S, sym_tol)
    A = _symmetrize(S)
    scale = float(np.sqrt(np.sum(A.hi**2))) if n else 0.0
    V = None
    if n > 1 and precondition:
        Q0 = np.linalg.eigh(A.to_float())[1]
        Q = _dd_orthonormalize(Q0)
        A = _symmetrize(dd_matmul(Q.T, dd_matmul(A, Q)))
        V = Q if vectors else None
    elif vectors:
        V = dd_eye(n)
    if n > 1:
        _jacobi(A, V, max_sweeps, tol_abs=1e-33 * scale)
    vals = A.diagonal()
    # sort by dd value: hi first, then lo
    order = np.lexsort((vals.lo, vals.hi))
    vals = vals[order]
    vecs = V[:, order] if V is not None else None
    return EigResult(values=vals, vectors=vecs)


@dataclass(frozen=True)
class DDSvdResult:
    """Thin SVD ``A = U diag(S) V^T`` with dd factors, ``S`` descending."""

    U: DD | None
    S: DD
    V: DD | None


def dd_svd(A, vectors: bool = True, *, precondition: bool = True,
           max_sweeps: int = _MAX_SWEEPS) -> DDSvdResult:
    """Singular value decomposition of a real tall matrix in dd arithmetic.

    One-sided (Hestenes) Jacobi on the columns of ``A V0``, where ``V0`` are
    the right singular vectors of a double-precision SVD polished to dd
    orthogonality.  Singular values are accurate to about ``U_DD ||A||`` in
    absolute terms, so squared values resolve far below the floor of a Gram
    eigensolve.

    Raises
    ------
    ConvergenceError
        If the sweep cap is exceeded.
    """
    A = _as_dd(A)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise ValueError("dd_svd needs a 2-D matrix with at least as many rows as columns")
    m, n = A.shape
    if precondition and n > 1:
        V0 = np.linalg.svd(A.to_float(), full_matrices=False)[2].T
        V = _dd_orthonormalize(V0)
        B = dd_matmul(A, V)
    else:
        V = dd_eye(n)
        B = A.copy()
    tol = max(m, n) * U_DD
    rounds = _round_robin(n)
    Bh, Bl = B.hi, B.lo
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        for P, Q in rounds:
            if P.size == 0:
                continue
            bp = DD._raw(Bh[:, P], Bl[:, P])
            bq = DD._raw(Bh[:, Q], Bl[:, Q])
            alpha = dd_sum(bp * bp, axis=0)
            beta = dd_sum(bq * bq, axis=0)
            gamma = dd_sum(bp * bq, axis=0)
            mag = np.abs(gamma.hi)
            active = mag > tol * np.sqrt(alpha.hi * beta.hi)
            if not np.any(active):
                continue
            rotated += int(np.count_nonzero(active))
            ch, cl, sh, sl, _, _ = _rotation(alpha.hi, alpha.lo, beta.hi, beta.lo,
                                             gamma.hi, gamma.lo, active)
            _rotate_cols(Bh, Bl, P, Q, ch, cl, sh, sl)
            _rotate_cols(V.hi, V.lo, P, Q, ch, cl, sh, sl)
        if rotated == 0:
            break
    else:
        raise ConvergenceError(f"dd one-sided Jacobi did not converge in {max_sweeps} sweeps")
    B = DD._raw(Bh, Bl)
    S = dd_sum(B * B, axis=0).sqrt()
    order = np.lexsort((-S.lo, -S.hi))
    S = S[order]
    if not vectors:
        return DDSvdResult(U=None, S=S, V=None)
    V = V[:, order]
    B = B[:, order]
    safe = DD._raw(np.where(S.hi > 0, S.hi, 1.0), np.where(S.hi > 0, S.lo, 0.0))
    U = B / safe.reshape(1, -1)
    return DDSvdResult(U=U, S=S, V=V)
