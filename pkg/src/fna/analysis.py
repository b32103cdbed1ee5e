"""Frame and sampling diagnostics.

Frame bounds and numerical redundancy from Gram spectra, plunge indices and
tail sums of singular value profiles, stability constants ``A_{n,m}`` and
``A^eps_{n,m}``, certification of the Fourier-extension bounds, and Monte
Carlo checks of the random sampling guarantees.

Conventions
-----------
* Spectra are eigenvalues of Gram matrices, i.e. squared singular values of
  the synthesis operator, reported in descending order.
* The Fourier extension frame ``exp(2 pi i k x)`` on ``[-W, W]`` is analysed
  under ``dx``, where its Gram matrix is the prolate matrix with spectrum in
  ``(0, 1)``.  Other dictionaries default to their probability measure.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np

from . import xprec
from .dictionaries import AugmentedDict, Dictionary, FourierExtDict
from .errors import BoundViolationError, NotPositiveDefiniteError, OutOfRangeError
from .linalg import EPS_DP, svd, tikhonov_apply
from .quadrature import (gauss_legendre_interval, gram_continuous, gram_discrete, gram_prolate, realify,
                         synthesis_factor)
from .sampling import (EPS2_GUARD, LAMBDA_GUARD, ChristoffelEvaluator, DensityTable, SampleSet,
                       draw_iid)
from .xprec import DD

__all__ = [
    "FrameReport",
    "SpectrumReport",
    "SpectralSystem",
    "spectral_system",
    "RegularizationReport",
    "FourierReport",
    "MonteCarloReport",
    "AugmentedReport",
    "ConditionReport",
    "gram_spectrum",
    "frame_bounds",
    "frame_report",
    "eps_rank_redundant",
    "plunge_and_tail",
    "tail_sum",
    "stability_constant",
    "stability_pair",
    "prolate_eigensystem",
    "fourier_plunge_indices",
    "fourier_numdim_bound",
    "fourier_christoffel_bound",
    "verify_theorem9",
    "verify_fourier_extension",
    "christoffel_endpoint_ratio",
    "ridge_sample_size",
    "plain_sample_size",
    "trial_seed",
    "mz_montecarlo",
    "quadrature_samples",
    "verify_augmented_basis",
    "condition_bound_check",
    "tsvd_error_bound",
]

#: Relative slack allowed when certifying inequalities.
SLACK = 1e-8
#: Prolate eigenvalues below this are not resolved by :func:`prolate_eigensystem`.
PROLATE_FLOOR = 1e-50


def _as_dd_matrix(G) -> DD:
    if isinstance(G, tuple):
        return realify(G)
    if isinstance(G, DD):
        return G
    G = np.asarray(G)
    if np.iscomplexobj(G):
        return realify((xprec.dd(G.real), xprec.dd(G.imag)))
    return xprec.dd(G)


def gram_spectrum(G, precision: str = "dd") -> np.ndarray:
    """Eigenvalues of a Gram matrix in descending order.

    ``precision="dd"`` uses the double-double Jacobi solver (floor about
    ``1e-32 ||G||``); ``"double"`` uses LAPACK.  Complex matrices are
    realified, which duplicates every eigenvalue; the duplicates are removed.
    """
    complex_input = isinstance(G, tuple) or (not isinstance(G, DD) and np.iscomplexobj(G))
    if precision == "dd":
        lam = xprec.dd_sym_eig(_as_dd_matrix(G)).values.to_float()
    elif precision == "double":
        M = G.to_float() if isinstance(G, DD) else np.asarray(G)
        lam = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        complex_input = False
    else:
        raise ValueError("precision must be 'dd' or 'double'")
    if complex_input:
        lam = lam[::2]
    return np.sort(lam)[::-1]


# ---------------------------------------------------------------------------
# frame bounds and spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameReport:
    """Optimal frame bounds of a finite spanning set.

    ``A_n`` is the smallest eigenvalue of the Gram matrix above the zero
    floor and ``B_n`` the largest.  ``numerically_redundant`` is
    ``A_n <= eps_mach**2 * B_n``.
    """

    A_n: float
    B_n: float
    numerically_redundant: bool
    eps_mach: float
    precision: str
    eigenvalues: np.ndarray = field(repr=False)


def frame_bounds(G, zero_tol: float = 1e-30, eps_mach: float = EPS_DP, *,
                 precision: str = "dd") -> FrameReport:
    """Frame bounds from a Gram matrix.

    Parameters
    ----------
    G : DD, ndarray or (DD, DD)
        Hermitian positive semidefinite Gram matrix.
    zero_tol : float
        Eigenvalues at or below ``zero_tol * lambda_max`` count as zero.
    eps_mach : float
        Precision at which redundancy is judged.

    Raises
    ------
    ValueError
        If every eigenvalue lies below the floor.
    """
    return frame_report(gram_spectrum(G, precision), zero_tol, eps_mach, precision=precision)


def frame_report(eigenvalues, zero_tol: float = 1e-30, eps_mach: float = EPS_DP, *,
                 precision: str = "dd") -> FrameReport:
    """:class:`FrameReport` from a precomputed Gram spectrum."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    B = float(lam[0])
    if not B > 0:
        raise ValueError("Gram matrix has no positive eigenvalue")
    nz = lam[lam > zero_tol * B]
    if nz.size == 0:
        raise ValueError("all eigenvalues below the zero floor")
    A = float(nz[-1])
    return FrameReport(A_n=A, B_n=B, numerically_redundant=bool(A <= eps_mach**2 * B),
                       eps_mach=float(eps_mach), precision=precision, eigenvalues=lam)


def eps_rank_redundant(sigmas, eps_mach: float = EPS_DP) -> bool:
    """Redundancy through the eps-rank: ``sigma_min <= eps_mach * sigma_max``."""
    s = np.asarray(sigmas, dtype=float)
    return bool(s.min() <= eps_mach * s.max())


@dataclass(frozen=True)
class SpectrumReport:
    """Plunge indices, tail sum and numerical dimension of a profile.

    Indices are one-based counts: ``sigma_i^2 >= 1 - eps^2`` for
    ``i <= i1`` and ``sigma_i^2 <= eps^2`` for ``i > i2``.
    """

    sigmas: np.ndarray = field(repr=False)
    eps: float
    normalization: str
    i1: int
    i2: int
    s_tail: float
    n_eps: float


def _normalized_squares(sigmas, normalization: str) -> np.ndarray:
    s = sigmas.to_float() if isinstance(sigmas, DD) else np.asarray(sigmas, dtype=float)
    if np.any(np.diff(s) > 0):
        raise ValueError("sigmas must be sorted in descending order")
    s2 = s * s
    if normalization == "relative":
        s2 = s2 / s2[0]
    elif normalization != "literal":
        raise ValueError("normalization must be 'literal' or 'relative'")
    return s2


def tail_sum(sigmas, eps: float, i2: int, normalization: str = "literal") -> float:
    """``S_tail = sum_{i > i2} (sigma_i/eps)^2`` for a given (one-based) ``i2``."""
    s2 = _normalized_squares(sigmas, normalization)
    i2 = max(int(i2), 0)
    return float(np.sum(s2[i2:]) / eps**2)


def plunge_and_tail(sigmas, eps: float, normalization: str = "literal") -> SpectrumReport:
    """Smallest ``i2`` and largest ``i1`` admissible for a descending profile.

    ``normalization="literal"`` compares ``sigma^2`` with ``1 - eps^2`` and
    ``eps^2`` directly (profiles of sets with frame bounds near one);
    ``"relative"`` first divides by ``sigma_max^2``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s2 = _normalized_squares(sigmas, normalization)
    i1 = int(np.sum(np.cumprod(s2 >= 1.0 - eps**2)))
    above = np.flatnonzero(s2 > eps**2)
    i2 = int(above[-1] + 1) if above.size else 0
    s_tail = float(np.sum(s2[i2:]) / eps**2)
    n_eps = float(np.sum(s2 / (s2 + eps**2)))
    return SpectrumReport(sigmas=np.sqrt(s2), eps=float(eps), normalization=normalization,
                          i1=i1, i2=i2, s_tail=s_tail, n_eps=n_eps)


# ---------------------------------------------------------------------------
# stability constants
# ---------------------------------------------------------------------------

def _match_sizes(size: int, G_n: DD) -> DD:
    # a real G_n paired with a realified complex system of twice its size
    n = G_n.shape[0]
    if size == n:
        return G_n
    if size == 2 * n:
        out = xprec.dd_zeros((size, size))
        out[:n, :n] = G_n
        out[n:, n:] = G_n
        return out
    raise ValueError("Gram matrices have incompatible sizes")


def stability_constant(G_nm, G_n, eps: float = 0.0) -> float:
    """Smallest eigenvalue of the pencil ``(G_nm + eps^2 I, G_n)``.

    Computed in double-double as ``1 / lambda_max(L^{-1} G_n L^{-T})`` with
    ``L`` the Cholesky factor of ``G_nm + eps^2 I``, which tolerates a
    singular ``G_n``.  For ``eps = 0`` a numerically singular ``G_nm`` gives
    ``A_{n,m} = 0``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    Gm = _as_dd_matrix(G_nm)
    Gn = _match_sizes(Gm.shape[0], _as_dd_matrix(G_n))
    try:
        L = xprec.dd_cholesky(Gm, float(eps) ** 2)
    except NotPositiveDefiniteError:
        if eps > 0:
            raise
        return 0.0
    Y = xprec.dd_solve_lower(L, Gn)
    C = xprec.dd_solve_lower(L, Y.T.copy())
    C = (C + C.T) * 0.5
    mu = float(xprec.dd_sym_eig(C).values.to_float()[-1])
    if not mu > 0:
        raise ValueError("G_n has no positive eigenvalue")
    return 1.0 / mu


def stability_pair(G_nm, G_n, eps: float) -> tuple[float, float]:
    """``(A_{n,m}, A^eps_{n,m})``, asserting the relaxation ``A^eps >= A``."""
    A = stability_constant(G_nm, G_n, 0.0)
    Ae = stability_constant(G_nm, G_n, eps)
    if Ae < A * (1.0 - SLACK):
        raise BoundViolationError(f"A^eps = {Ae:.6e} below A = {A:.6e}")
    return A, Ae


# ---------------------------------------------------------------------------
# Fourier extension: accurate prolate spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralSystem:
    """Eigenpairs of a Gram matrix, eigenvalues descending.

    ``values`` hold ``sigma_i^2`` of the synthesis operator and ``vectors``
    the coefficient vectors ``v_i``, so that ``u_i = T v_i / sigma_i`` are
    the orthonormal singular functions.  ``resolved`` marks eigenvalues the
    construction determines to high relative accuracy.
    """

    dictionary: Dictionary
    values: np.ndarray
    values_dd: DD = field(repr=False)
    vectors: DD = field(repr=False)
    resolved: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.dictionary.count

    def projections(self, x) -> np.ndarray:
        """``|phi(x) v_i|^2`` for all i (rows: points), from dd arithmetic."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((x.size, self.values.size))
        for s in range(0, x.size, 512):
            Phi = self.dictionary.evaluate_dd(x[s:s + 512])
            for part in (Phi if isinstance(Phi, tuple) else (Phi,)):
                Y = xprec.dd_matmul(part, self.vectors)
                out[s:s + 512] += (Y * Y).to_float()
        return out

    def u_squared(self, x) -> np.ndarray:
        """``|u_i(x)|^2``; columns of unresolved eigenvalues are NaN."""
        P = self.projections(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            U2 = P / self.values[None, :]
        U2[:, ~self.resolved] = np.nan
        return U2

    def sup_norms(self, x) -> np.ndarray:
        """``max_x |u_i(x)|`` over the points ``x`` (NaN when unresolved)."""
        return np.sqrt(np.max(self.u_squared(x), axis=0))

    def num_christoffel(self, eps: float, x) -> np.ndarray:
        """Spectral form ``sum |phi v_i|^2 / (sigma_i^2 + eps^2)``."""
        P = self.projections(x)
        return P @ (1.0 / (np.maximum(self.values, 0.0) + eps**2))

    def numerical_dimension(self, eps: float) -> float:
        lam = np.maximum(self.values, 0.0)
        return float(np.sum(lam / (lam + eps**2)))


def spectral_system(d: Dictionary, measure: str = "probability", *,
                    resolve_tol: float = 1e-28) -> SpectralSystem:
    """Accurate Gram eigenpairs of a dictionary.

    The Fourier extension frame uses :func:`prolate_eigensystem` (under
    ``dx``, whatever ``measure`` says).  Real dictionaries use a dd SVD of
    the quadrature factor ``A`` with ``A^T A = G``; singular values below
    ``resolve_tol * sigma_max`` are marked unresolved.
    """
    if isinstance(d, FourierExtDict):
        return prolate_eigensystem(d.count, d.W)
    A = synthesis_factor(d, "dd", measure)
    res = xprec.dd_svd(A, vectors=True)
    lam = res.S * res.S
    vals = lam.to_float()
    sig = res.S.to_float()
    return SpectralSystem(dictionary=d, values=vals, values_dd=lam, vectors=res.V,
                          resolved=sig > resolve_tol * sig[0])


def _slepian_tridiagonal(n: int, W: float) -> DD:
    k = np.arange(n, dtype=float)
    c = (n - 1) / 2.0 - k
    with mpmath.workdps(40):
        cw = xprec.dd_from_mpf([mpmath.cos(2 * mpmath.pi * mpmath.mpf(W))])
    T = xprec.dd_zeros((n, n))
    idx = np.arange(n)
    T[idx, idx] = xprec.dd(c * c) * cw
    off = xprec.dd((k[:-1] + 1.0) * (n - 1.0 - k[:-1]) / 2.0)
    T[idx[:-1], idx[1:]] = off
    T[idx[1:], idx[:-1]] = off
    return T


def prolate_eigensystem(n: int, W: float) -> SpectralSystem:
    """Eigenpairs of the prolate matrix resolved far below the dd floor.

    The prolate matrix commutes with a symmetric tridiagonal matrix whose
    eigenvalues are well separated, so its eigenvectors are computed from
    that matrix in dd.  Each eigenvalue is then the squared ``L^2(dx)`` norm
    of ``x -> phi(x) v_i`` on ``[-W, W]``, integrated by a dd Gauss rule.
    This keeps relative accuracy down to about ``1e-50``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < W < 0.5:
        raise ValueError("W must lie in (0, 1/2)")
    V = xprec.dd_sym_eig(_slepian_tridiagonal(n, W), vectors=True).vectors
    r = gauss_legendre_interval(8 * n + 64, -W, W, "dd")
    re, im = FourierExtDict(n, W).evaluate_dd(r.nodes_dd)
    Yr = xprec.dd_matmul(re, V)
    Yi = xprec.dd_matmul(im, V)
    lam = xprec.dd_matmul(r.weights_dd.reshape(1, -1), Yr * Yr + Yi * Yi).reshape(-1)
    order = np.argsort(-lam.to_float(), kind="stable")
    lam = lam[order]
    V = V[:, order]
    vals = lam.to_float()
    return SpectralSystem(dictionary=FourierExtDict(n, W), values=vals, values_dd=lam, vectors=V,
                          resolved=vals > PROLATE_FLOOR)


def fourier_plunge_indices(n: int, W: float, eps: float) -> tuple[float, float]:
    """``(i1, i2)`` of the Fourier extension bounds (real numbers)."""
    t = 2.0 / math.pi**2 * math.log(8.0 / eps**2) * math.log(4.0 * n)
    i2 = math.ceil(2 * n * W) + 2 + t
    i1 = math.floor(2 * n * W) - 1 - t
    return i1, i2


def fourier_numdim_bound(n: int, W: float, eps: float) -> float:
    """Upper bound on ``n^eps`` for the Fourier extension frame."""
    return math.ceil(2 * n * W) + 2 + 2.0 / math.pi**2 * (math.log(8.0 / eps**2) + 1.0) * math.log(4.0 * n)


def fourier_christoffel_bound(n: int, eps: float, u_sup2: float) -> float:
    """Bound on ``||k_n^eps||_inf`` given ``max_{i > i1} ||u_i||_inf^2``."""
    c = 4.0 + 2.0 / math.pi**2 * (2.0 * math.log(8.0 / eps**2) + 1.0) * math.log(4.0 * n)
    return n / (1.0 - eps**2) + c * u_sup2


def christoffel_endpoint_ratio(n: int, W: float, G=None) -> float:
    """``k_n(W) / (n^2 (pi/2) cot(pi W))`` under ``dx``.

    Raises
    ------
    OutOfRangeError
        If ``lambda_min`` of the prolate matrix is below ``1e-25 lambda_max``.
    """
    d = FourierExtDict(n, W)
    G = gram_prolate(n, W, "dd") if G is None else G
    k = ChristoffelEvaluator(d, G)(np.array([W]))[0]
    return float(k / (n * n * 0.5 * math.pi / math.tan(math.pi * W)))


# ---------------------------------------------------------------------------
# regularization sandwich certification
# ---------------------------------------------------------------------------

@dataclass
class RegularizationReport:
    """Slacks of the regularization inequalities (positive means satisfied)."""

    n_eps: float
    i1: int
    i2: int
    s_tail: float
    dimension_slack: float
    lower_slack: float
    upper_slack: float
    uniform_slack: float | None
    uniform_applicable: bool
    probes: int

    @property
    def holds(self) -> bool:
        ok = min(self.dimension_slack, self.lower_slack, self.upper_slack) >= -SLACK
        if self.uniform_slack is not None:
            ok = ok and self.uniform_slack >= -SLACK
        return ok


def _rel_slack(lhs, rhs) -> float:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(rhs), np.abs(lhs))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.min((rhs - lhs) / scale))


def verify_theorem9(d: Dictionary, G, eps: float, probe_points, *, system=None,
                    normalization: str = "literal", raise_on_violation: bool = True) -> RegularizationReport:
    """Check the regularization sandwich and dimension bounds at probe points.

    Verifies ``n^eps <= i2 + S_tail``,
    ``k_trunc/2 <= k^eps <= k_trunc + S_tail max_{i>i2} |u_i|^2`` and, when
    every ``|phi_i| <= 1`` on the probes, the uniform bound
    ``max k^eps <= n/(1-eps^2) + ((i2-i1) + S_tail) max_{i>i1} ||u_i||^2``.
    Suprema are taken over the probe points.

    Parameters
    ----------
    d : Dictionary
    G : DD
        Gram matrix of ``d`` (real).
    eps : float
    probe_points : array_like
    system : SpectralSystem, optional
        Accurate eigenpairs (see :func:`spectral_system`) to use instead of a
        dd eigensolve of ``G``.  ``k^eps`` is always taken in spectral form
        so both sides of the sandwich share one eigen-decomposition.
    normalization : {"literal", "relative"}

    Raises
    ------
    OutOfRangeError
        If ``eps^2 < 1e-30 ||G||``.
    BoundViolationError
        If any inequality fails by more than the relative slack ``1e-8``.
    """
    x = np.atleast_1d(np.asarray(probe_points, dtype=float))
    if system is not None:
        lam = system.values
        P = system.projections(x)
        resolved = system.resolved
    else:
        Gd = _as_dd_matrix(G)
        eig = xprec.dd_sym_eig(Gd, vectors=True)
        lam = eig.values.to_float()[::-1]
        V = eig.vectors[:, np.arange(lam.size)[::-1]]
        Phi = d.evaluate_dd(x)
        parts = Phi if isinstance(Phi, tuple) else (Phi,)
        P = np.zeros((x.size, lam.size))
        for part in parts:
            Y = xprec.dd_matmul(part, V)
            P += (Y * Y).to_float()
        resolved = lam > 1e-30 * lam[0]
    lam_c = np.maximum(lam, 0.0)
    rep = plunge_and_tail(np.sqrt(lam_c), eps, normalization)
    e2 = eps**2 * (lam_c[0] if normalization == "relative" else 1.0)
    if e2 < EPS2_GUARD * lam_c[0]:
        raise OutOfRangeError(f"eps^2 = {e2:.3e} below dd floor {EPS2_GUARD:.0e}*||G||")
    with np.errstate(divide="ignore", invalid="ignore"):
        U2 = np.where(resolved[None, :], P / lam_c[None, :], np.nan)
    k_eps = P @ (1.0 / (lam_c + e2))
    k_trunc = np.sum(U2[:, :rep.i2], axis=1)
    tail = U2[:, rep.i2:]
    tail_max = np.nanmax(tail, axis=1) if tail.shape[1] and np.any(np.isfinite(tail)) else np.zeros(x.size)
    dim_slack = _rel_slack(rep.n_eps, rep.i2 + rep.s_tail)
    low_slack = _rel_slack(0.5 * k_trunc, k_eps)
    up_slack = _rel_slack(k_eps, k_trunc + rep.s_tail * tail_max)
    phi_max = float(np.max(np.abs(d.evaluate(x))))
    uniform = phi_max <= 1.0 + 1e-12
    uni_slack = None
    if uniform:
        sup2 = np.nanmax(U2[:, rep.i1:]) if rep.i1 < lam.size else 0.0
        rhs = d.count / (1.0 - eps**2) + ((rep.i2 - rep.i1) + rep.s_tail) * sup2
        uni_slack = _rel_slack(np.max(k_eps), rhs)
    report = RegularizationReport(n_eps=rep.n_eps, i1=rep.i1, i2=rep.i2, s_tail=rep.s_tail,
                            dimension_slack=dim_slack, lower_slack=low_slack, upper_slack=up_slack,
                            uniform_slack=uni_slack, uniform_applicable=uniform, probes=x.size)
    if raise_on_violation and not report.holds:
        raise BoundViolationError(f"regularization inequalities violated: {report}")
    return report


@dataclass
class FourierReport:
    """Certification of the Fourier extension index and dimension bounds.

    Boolean fields are ``True`` when the corresponding statement holds on the
    computed spectrum.  ``k_eps_bound_holds`` is ``None`` when it was not
    requested.
    """

    n: int
    W: float
    eps: float
    n_eps: float
    n_eps_bound: float
    i1_formula: float
    i2_formula: float
    s_tail_at_i2: float
    s_tail_bound: float
    i2_ok: bool
    i1_ok: bool
    s_tail_ok: bool
    n_eps_ok: bool
    n_eps_le_n: bool
    k_eps_max: float | None = None
    k_eps_bound: float | None = None
    k_eps_bound_holds: bool | None = None
    christoffel_endpoint_ratio: float | None = None
    guard_note: str = ""

    @property
    def violations(self) -> int:
        flags = [self.i2_ok, self.i1_ok, self.s_tail_ok, self.n_eps_ok, self.n_eps_le_n]
        if self.k_eps_bound_holds is not None:
            flags.append(self.k_eps_bound_holds)
        return sum(1 for f in flags if not f)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_fourier_extension(n: int, W: float, eps: float, *, system: SpectralSystem | None = None,
                            k_bound: bool = False, grid_size: int = 2001,
                            ratio: bool = False) -> FourierReport:
    """Check the Fourier extension bounds on an accurate prolate spectrum.

    Parameters
    ----------
    n : int
        Number of frequencies.
    W : float
        Half-width of the domain ``[-W, W]``.
    eps : float
    system : SpectralSystem, optional
        Reuse precomputed eigenpairs.
    k_bound : bool
        Also check the uniform bound on ``k_n^eps`` over ``grid_size``
        Chebyshev-clustered points, using only resolved ``u_i`` on the
        right-hand side (which can only make it smaller).
    ratio : bool
        Also report the ``k_n(W)`` asymptotic ratio when the dd guard
        ``lambda_min >= 1e-25 lambda_max`` admits ``n``.
    """
    sysm = prolate_eigensystem(n, W) if system is None else system
    lam = np.maximum(sysm.values, 0.0)
    i1f, i2f = fourier_plunge_indices(n, W, eps)
    j2 = max(int(math.floor(i2f)), 0)
    j1 = int(math.floor(i1f))
    i2_ok = bool(np.all(lam[j2:] <= eps**2))
    i1_ok = bool(np.all(lam[:max(j1, 0)] >= 1.0 - eps**2))
    s_tail = float(np.sum(lam[j2:]) / eps**2)
    s_bound = 2.0 / math.pi**2 * math.log(4.0 * n)
    n_eps = float(np.sum(lam / (lam + eps**2)))
    nb = fourier_numdim_bound(n, W, eps)
    rep = FourierReport(n=n, W=float(W), eps=float(eps), n_eps=n_eps, n_eps_bound=nb,
                        i1_formula=i1f, i2_formula=i2f, s_tail_at_i2=s_tail, s_tail_bound=s_bound,
                        i2_ok=i2_ok, i1_ok=i1_ok, s_tail_ok=s_tail <= s_bound, n_eps_ok=n_eps <= nb,
                        n_eps_le_n=n_eps <= n)
    if k_bound:
        s = np.cos(np.pi * np.arange(grid_size)[::-1] / (grid_size - 1))
        x = W * s
        P = sysm.projections(x)
        k_eps = P @ (1.0 / (lam + eps**2))
        with np.errstate(divide="ignore", invalid="ignore"):
            U2 = P / lam[None, :]
        cols = np.arange(n) >= max(j1, 0)
        cols &= sysm.resolved
        sup2 = float(np.max(U2[:, cols])) if np.any(cols) else 0.0
        rep.k_eps_max = float(np.max(k_eps))
        rep.k_eps_bound = fourier_christoffel_bound(n, eps, sup2)
        rep.k_eps_bound_holds = rep.k_eps_max <= rep.k_eps_bound
    if ratio:
        if lam[-1] >= LAMBDA_GUARD * lam[0]:
            rep.christoffel_endpoint_ratio = christoffel_endpoint_ratio(n, W)
        else:
            rep.guard_note = f"lambda_min {lam[-1]:.2e} below {LAMBDA_GUARD:.0e} lambda_max"
    return rep


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------

def ridge_sample_size(n_eps: float, gamma: float) -> int:
    """``ceil(32/3 n^eps log(16 n^eps / gamma))``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return int(math.ceil(32.0 / 3.0 * n_eps * math.log(16.0 * n_eps / gamma)))


def plain_sample_size(k_inf: float, n: int, gamma: float) -> int:
    """``ceil(9.25 ||w k_n||_inf log(2n / gamma))``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return int(math.ceil(9.25 * k_inf * math.log(2.0 * n / gamma)))


def trial_seed(seed: int, index: int) -> int:
    """Per-trial seed derived from ``(seed, index)`` only."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


@dataclass
class MonteCarloReport:
    m: int
    eps: float
    trials: int
    seed: int
    successes: int
    values: np.ndarray = field(repr=False)

    @property
    def success_fraction(self) -> float:
        return self.successes / self.trials


def mz_montecarlo(d: Dictionary, G, density: DensityTable, m: int, eps: float, trials: int,
                  seed: int, *, threshold: float = 0.5) -> MonteCarloReport:
    """Fraction of random draws with ``A^eps_{n,m} >= threshold``.

    Each trial draws ``m`` points from ``density`` with the seed
    ``trial_seed(seed, t)``, so results do not depend on trial order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    Gn = _as_dd_matrix(G)
    vals = np.empty(trials)
    for t in range(trials):
        S = draw_iid(density, m, trial_seed(seed, t))
        vals[t] = stability_constant(gram_discrete(d, S, "dd"), Gn, eps)
    ok = int(np.sum(vals >= threshold))
    return MonteCarloReport(m=int(m), eps=float(eps), trials=int(trials), seed=int(seed),
                            successes=ok, values=vals)


# ---------------------------------------------------------------------------
# augmented basis and conditioning
# ---------------------------------------------------------------------------

def quadrature_samples(m: int, domain=(-1.0, 1.0)) -> SampleSet:
    """Gauss-Legendre points whose discrete norm is the probability L2 norm
    on polynomials of degree below ``2m``."""
    a, b = domain
    r = gauss_legendre_interval(m, a, b)
    w = r.weights * m / (b - a)
    return SampleSet(r.nodes, w, {"rule": "gauss-legendre", "m": m})


@dataclass
class AugmentedReport:
    A_eps: float
    holds: bool
    precondition_residual: float


def verify_augmented_basis(base: Dictionary, psi, samples: SampleSet, eps: float, *,
                           tol: float = 1e-12) -> AugmentedReport:
    """Stability of a basis augmented by one function, without new samples.

    Requires ``||v||_H = ||v||_m`` on the span of ``base`` (checked as
    ``G_{n,m} = G_n`` within ``tol``) and reports ``A^eps`` of the augmented
    system together with the flag ``A^eps >= 1/2``.

    Raises
    ------
    ValueError
        If the samples do not reproduce the continuous norm on the base span.
    """
    Gn_base = gram_continuous(base, precision="dd")
    Gm_base = gram_discrete(base, samples, "dd")
    res = float(np.max(np.abs((Gm_base - Gn_base).to_float())))
    if res > tol:
        raise ValueError(f"samples do not satisfy the exactness precondition (residual {res:.2e})")
    aug = AugmentedDict(base, psi)
    N = 2 * aug.count + 200
    Gn = gram_continuous(aug, gauss_legendre_interval(N, -1.0, 1.0, "dd"), precision="dd", check=False)
    Gm = gram_discrete(aug, samples, "dd")
    Ae = stability_constant(Gm, Gn, eps)
    return AugmentedReport(A_eps=Ae, holds=Ae >= 0.5, precondition_residual=res)


@dataclass
class ConditionReport:
    bound: float
    empirical: float | None = None
    probes: int = 0

    @property
    def holds(self) -> bool:
        return self.empirical is None or self.empirical <= self.bound * (1.0 + SLACK)


def condition_bound_check(A_eps: float, A=None, G_n=None, eps: float | None = None, *,
                          probes: int = 200, seed: int = 0) -> ConditionReport:
    """Condition bound ``(1+sqrt(2))/sqrt(A^eps)`` and an empirical probe.

    With the sampled matrix ``A``, its continuous Gram ``G_n`` and ``eps``,
    the absolute condition number of the Tikhonov map ``d -> T x(d)`` is
    estimated as the largest ``||T x(delta)||_H`` over ``probes`` random unit
    vectors ``delta`` (``||.||_H`` through ``G_n`` in dd arithmetic).
    """
    if not A_eps > 0:
        raise ValueError("A_eps must be positive")
    bound = (1.0 + math.sqrt(2.0)) / math.sqrt(A_eps)
    if A is None:
        return ConditionReport(bound=bound)
    if G_n is None or eps is None or not eps > 0:
        raise ValueError("the probe needs G_n and a positive eps")
    A = np.asarray(A)
    s = svd(A)
    Gd = _match_sizes(2 * A.shape[1] if np.iscomplexobj(A) else A.shape[1], _as_dd_matrix(G_n))
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    worst = 0.0
    for _ in range(probes):
        delta = rng.standard_normal(A.shape[0])
        if np.iscomplexobj(A):
            delta = delta + 1j * rng.standard_normal(A.shape[0])
        delta /= np.linalg.norm(delta)
        x = tikhonov_apply(s, eps, delta)
        xr = np.concatenate([x.real, x.imag]) if np.iscomplexobj(x) else x
        h2 = float(xprec.dd_matmul(xprec.dd(xr).reshape(1, -1), xprec.dd_matmul(Gd, xr)).to_float().ravel()[0])
        worst = max(worst, math.sqrt(max(h2, 0.0)))
    return ConditionReport(bound=bound, empirical=worst, probes=probes)


def tsvd_error_bound(best_err_H: float, eps: float, x_norm: float, f_norm_H: float,
                   C: float = 100.0) -> float:
    """``sqrt(2) e + (1+sqrt(2)) eps ||x|| + (1+sqrt(2)) C eps_dp ||f||``."""
    r = 1.0 + math.sqrt(2.0)
    return math.sqrt(2.0) * best_err_H + r * eps * x_norm + r * C * EPS_DP * f_norm_H
