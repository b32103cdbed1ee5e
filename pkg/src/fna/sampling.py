"""Sample sets, Christoffel functions, numerical dimension and sampling densities.

``k_n(x) = phi(x) G^+ phi(x)^*`` is the inverse Christoffel function of the
span and ``k_n^eps(x) = phi(x) (G + eps^2 I)^{-1} phi(x)^*`` its ridge-damped
(numerical) version.  Both are evaluated in double-double arithmetic from a
dd Gram matrix, since the interesting regime has ``eps^2`` near ``1e-30``.

Random draws use numpy's PCG64 generator; every :class:`SampleSet` records
``(generator, seed)`` in its provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import xprec
from .dictionaries import Dictionary
from .errors import OutOfRangeError
from .quadrature import gauss_legendre
from .xprec import DD

__all__ = [
    "SampleSet",
    "DensityTable",
    "ChristoffelEvaluator",
    "christoffel",
    "num_christoffel",
    "numerical_dimension",
    "optimal_density",
    "uniform_density",
    "density_grid",
    "draw_iid",
    "deterministic_set",
    "GENERATOR",
    "LAMBDA_GUARD",
    "EPS2_GUARD",
]

#: Name of the pseudo-random generator used for all draws.
GENERATOR = "numpy.random.PCG64"
#: Smallest admissible relative eigenvalue for the plain Christoffel function.
LAMBDA_GUARD = 1e-25
#: Smallest admissible relative eps**2 for the numerical Christoffel function.
EPS2_GUARD = 1e-30

_DENSITY_GRID = 4096


@dataclass(frozen=True)
class SampleSet:
    """Points with weights ``w(x_j)`` (before division by ``m``).

    The sampling functional is ``sqrt(w(x_j)/m) f(x_j)``.
    """

    points: np.ndarray
    weights: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.shape != w.shape or p.ndim != 1:
            raise ValueError("points and weights must be 1-D arrays of equal length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return int(self.points.size)

    def functional(self, f) -> np.ndarray:
        """Sample data ``sqrt(w_j/m) f(x_j)``."""
        return np.sqrt(self.weights / self.m) * f(self.points)

    def __add__(self, other: "SampleSet") -> "SampleSet":
        """Union of two sets (weights kept; ``m`` becomes the total count)."""
        return SampleSet(np.concatenate([self.points, other.points]),
                         np.concatenate([self.weights, other.weights]),
                         {"union": [self.provenance, other.provenance]})


# ---------------------------------------------------------------------------
# Christoffel functions
# ---------------------------------------------------------------------------

def _spectrum(G: DD) -> np.ndarray:
    return xprec.dd_sym_eig(G).values.to_float()


class ChristoffelEvaluator:
    """Cached dd factorization for repeated Christoffel evaluations.

    Parameters
    ----------
    d : Dictionary
    G : DD
        Real symmetric continuous Gram matrix of ``d`` (dd).
    eps : float, optional
        Regularization; ``None`` or ``0`` selects the plain function
        ``k_n`` (guarded by ``lambda_min >= 1e-25 ||G||``).

    Raises
    ------
    OutOfRangeError
        If the requested quantity is below the dd computability floor.
    """

    def __init__(self, d: Dictionary, G, eps: float | None = None, *, eigenvalues=None):
        G = xprec.dd(G)
        if G.shape != (d.count, d.count):
            raise ValueError("Gram matrix does not match the dictionary size")
        self.d = d
        self.G = G
        self.eps = float(eps) if eps else 0.0
        self._eig = None if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
        if self.eps > 0:
            norm = float(self._eig.max()) if self._eig is not None else float(np.linalg.norm(G.to_float(), 2))
            if self.eps**2 < EPS2_GUARD * norm:
                raise OutOfRangeError(f"eps^2 = {self.eps**2:.3e} below dd floor {EPS2_GUARD:.0e}*||G||")
            self.L = xprec.dd_cholesky(G, self.eps**2)
        else:
            lam = self.eigenvalues
            lmin, lmax = float(lam[0]), float(lam[-1])
            if lmin < LAMBDA_GUARD * lmax:
                raise OutOfRangeError(
                    f"smallest Gram eigenvalue {lmin:.3e} below dd floor {LAMBDA_GUARD:.0e}*||G||")
            self.L = xprec.dd_cholesky(G)

    @property
    def eigenvalues(self) -> np.ndarray:
        if self._eig is None:
            self._eig = _spectrum(self.G)
        return self._eig

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.size)
        step = 512
        for s in range(0, x.size, step):
            out[s:s + step] = self._eval(x[s:s + step])
        return out

    def _eval(self, x):
        Phi = self.d.evaluate_dd(x)
        parts = Phi if isinstance(Phi, tuple) else (Phi,)
        total = xprec.dd_zeros(x.size)
        for P in parts:
            Y = xprec.dd_solve_lower(self.L, P.T.copy())
            total = total + xprec.dd_sum(Y * Y, axis=0)
        return total.to_float()


def christoffel(d: Dictionary, G, x) -> np.ndarray:
    """Inverse Christoffel function ``k_n(x) = phi(x) G^+ phi(x)^*``.

    Requires ``lambda_min(G) >= 1e-25 lambda_max(G)``.
    """
    return ChristoffelEvaluator(d, G)(x)


def num_christoffel(d: Dictionary, G, eps: float, x) -> np.ndarray:
    """Numerical Christoffel function ``phi(x) (G + eps^2 I)^{-1} phi(x)^*``.

    Requires ``eps > 0`` and ``eps^2 >= 1e-30 ||G||``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    return ChristoffelEvaluator(d, G, eps)(x)


def numerical_dimension(sigmas, eps: float) -> float:
    """``n^eps = sum sigma_i^2 / (sigma_i^2 + eps^2)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    s = sigmas.to_float() if isinstance(sigmas, DD) else np.asarray(sigmas, dtype=float)
    if np.any(s < 0):
        raise ValueError("singular values must be nonnegative")
    s2 = s * s
    return float(np.sum(s2 / (s2 + eps * eps)))


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityTable:
    """Tabulated sampling density ``mu`` (w.r.t. dx).

    The density is linear between grid points (so continuous), and ``cdf``
    holds its exact cumulative integral at the grid points (trapezoidal
    sums), normalized to end at 1.  The grid is Chebyshev clustered towards
    the endpoints, where Christoffel functions have boundary layers.
    ``rho`` is the reference probability density (constant on the domain).
    """

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    norm: float
    rho: float
    label: str = "custom"

    def __call__(self, x) -> np.ndarray:
        return np.interp(x, self.grid, self.density)

    def weight(self, x) -> np.ndarray:
        """Importance weight ``w = rho / mu``."""
        return self.rho / self(x)

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def inverse_cdf(self, u) -> np.ndarray:
        """Exact inverse of the piecewise-quadratic CDF."""
        u = np.asarray(u, dtype=float)
        g, d, c = self.grid, self.density, self.cdf
        i = np.clip(np.searchsorted(c, u, side="right") - 1, 0, g.size - 2)
        h = g[i + 1] - g[i]
        a, b = d[i], d[i + 1]
        r = np.clip(u - c[i], 0.0, None)
        disc = np.sqrt(np.maximum(a * a + 2.0 * (b - a) * r / h, 0.0))
        den = a + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(den > 0, 2.0 * r / den, 0.0)
        return np.clip(g[i] + np.minimum(s, h), g[0], g[-1])

    def to_rows(self):
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.grid, self.density, self.cdf)]


def density_grid(domain, size: int = _DENSITY_GRID) -> np.ndarray:
    """Chebyshev-clustered grid on ``domain`` (endpoints included)."""
    a, b = domain
    s = np.cos(np.pi * np.arange(size)[::-1] / (size - 1))
    g = 0.5 * (a + b) + 0.5 * (b - a) * s
    g[0], g[-1] = a, b
    return g


def _make_table(grid: np.ndarray, values: np.ndarray, rho: float, label: str) -> DensityTable:
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("density values must be finite and nonnegative")
    norm = float(np.trapezoid(values, grid))
    dens = values / norm
    inc = 0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)
    cdf = np.concatenate([[0.0], np.cumsum(inc)])
    cdf /= cdf[-1]
    dens = dens / float(np.trapezoid(dens, grid))
    return DensityTable(grid=grid, density=dens, cdf=cdf, norm=norm, rho=rho, label=label)


def uniform_density(domain=(-1.0, 1.0), size: int = _DENSITY_GRID) -> DensityTable:
    a, b = domain
    grid = density_grid(domain, size)
    return _make_table(grid, np.ones(size), 1.0 / (b - a), "uniform")


def optimal_density(d: Dictionary, G, kind: str = "plain", eps: float | None = None,
                    size: int = _DENSITY_GRID) -> DensityTable:
    """Christoffel sampling density ``k/<k> drho`` tabulated on a clustered grid.

    Parameters
    ----------
    kind : {"plain", "ridge"}
        ``k_n`` or ``k_n^eps``.
    eps : float
        Required for ``kind="ridge"``.
    """
    grid = density_grid(d.domain, size)
    if kind == "plain":
        k = christoffel(d, G, grid)
    elif kind == "ridge":
        if eps is None:
            raise ValueError("ridge density needs eps")
        k = num_christoffel(d, G, eps, grid)
    else:
        raise ValueError(f"unknown density kind {kind!r}")
    rho = d.measure_density
    tab = _make_table(grid, k * rho, rho, f"{kind}:{d.label}")
    return tab


def draw_iid(density: DensityTable, m: int, seed: int) -> SampleSet:
    """Draw ``m`` i.i.d. points by inverse CDF, with weights ``rho/mu``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    x = density.inverse_cdf(rng.random(m))
    w = density.weight(x)
    return SampleSet(x, w, {"density": density.label, "generator": GENERATOR, "seed": int(seed)})


def deterministic_set(kind: str, m: int, params: dict | None = None) -> SampleSet:
    """Deterministic point sets with unit weights.

    Kinds: ``legendre`` (Gauss-Legendre nodes), ``chebyshev``
    (``cos(j pi/(m-1))``), ``clustered`` (``-1 + 2*2**-j``, j = 1..m) and
    ``uniform-grid`` (equispaced on ``params["domain"]``, default [-1, 1]).
    """
    params = params or {}
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind == "legendre":
        x = gauss_legendre(m).nodes
    elif kind == "chebyshev":
        from .dictionaries import chebyshev_points
        x = chebyshev_points(m)
    elif kind == "clustered":
        x = -1.0 + 2.0 * 2.0 ** -np.arange(1, m + 1, dtype=float)
    elif kind == "uniform-grid":
        a, b = params.get("domain", (-1.0, 1.0))
        x = np.linspace(a, b, m)
    else:
        raise ValueError(f"unknown deterministic set {kind!r}")
    return SampleSet(np.asarray(x, dtype=float), np.ones(m), {"rule": kind, "m": m})
