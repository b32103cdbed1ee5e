"""Experiment runner: ``fna <subcommand> [options]``.

Every run writes one or more ``<name>.csv`` tables, an SVG rendering of each
figure and ``manifest.json`` into ``--out``.  CSV floats carry 17 significant
digits and rows are sorted by their parameters, so re-running a manifest
(``fna replay``) reproduces the CSV bytes.

Integer lists accept ``a,b,c`` or an inclusive range ``start:stop:step``.
Float lists accept ``a,b,c`` or ``start:stop:num`` (``num`` equispaced
values including both ends).

Exit codes: 0 success, 1 usage error, 2 guard violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .analysis import (christoffel_endpoint_ratio, eps_rank_redundant, mz_montecarlo, prolate_eigensystem,
                       ridge_sample_size, spectral_system, stability_pair, trial_seed, verify_fourier_extension)
from .dictionaries import from_name
from .errors import FnaError, OutOfRangeError
from .linalg import EPS_DP
from .quadrature import gram_continuous, gram_discrete
from .sampling import (LAMBDA_GUARD, deterministic_set, draw_iid, optimal_density,
                       uniform_density)
from .solvers import (FUNCTIONS, build_system, error_l2, error_sup, fit, fit_qr_orthogonalized,
                      fit_vwa)

__all__ = ["main", "build_parser", "Table", "write_csv", "format_value"]

DEFAULT_EPS = 10.0 * EPS_DP
EXIT_OK, EXIT_USAGE, EXIT_GUARD = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# tables and output
# ---------------------------------------------------------------------------

@dataclass
class Table:
    """A CSV table; ``rows`` are sorted before writing."""

    name: str
    header: list[str]
    rows: list[tuple] = field(default_factory=list)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _sort_key(row):
    return tuple((0, float(v), "") if isinstance(v, (int, float, np.integer, np.floating))
                 and not isinstance(v, (bool, np.bool_)) else (1, 0.0, str(v)) for v in row)


def write_csv(table: Table, out: Path) -> Path:
    """Write ``table`` as UTF-8 CSV with LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in sorted(table.rows, key=_sort_key):
        w.writerow([format_value(v) for v in row])
    path = out / f"{table.name}.csv"
    path.write_bytes(buf.getvalue().encode("utf-8"))
    return path


def read_csv(path) -> list[dict]:
    """Rows of a CSV written by :func:`write_csv` (values as strings)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _save_svg(fig, path: Path) -> Path:
    import matplotlib.pyplot as plt

    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _figure(ncols: int = 1):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fna"
    plt.rcParams["svg.fonttype"] = "path"
    fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 4.0), squeeze=False)
    return fig, list(axes[0])


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def int_list(text: str) -> list[int]:
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            return list(range(parts[0], parts[1] + 1, parts[2]))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def float_list(text: str) -> list[float]:
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, num = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(num))]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a float list: {text!r}") from None


def eps_value(text: str):
    if str(text) == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"eps must be a float or 'auto': {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("eps must be positive")
    return v


def _eps(args) -> float:
    return DEFAULT_EPS if args.eps == "auto" else float(args.eps)


def _function(name: str) -> Callable:
    if name not in FUNCTIONS:
        raise UsageError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}")
    return FUNCTIONS[name]


def _dictionary(name: str, n: int, W: float = 0.25):
    try:
        return from_name(name, n, W)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    tables: list[Table]
    figures: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    guard_violations: list[str] = field(default_factory=list)


def cmd_svd_profile(args) -> RunResult:
    """Singular value profiles ``sigma_i = sqrt(lambda_i(G))``."""
    prof = Table("svd_profile", ["n", "i", "sigma", "sigma_rel"])
    summ = Table("svd_summary", ["n", "count", "sigma_max", "sigma_min", "ratio", "redundant"])
    curves = {}
    for n in args.n:
        d = _dictionary(args.dict, n, args.W)
        if args.precision == "dd":
            lam = spectral_system(d).values
        else:
            G = gram_continuous(d, precision="double")
            if isinstance(G, tuple):
                G = G[0] + 1j * G[1]
            lam = np.sort(np.linalg.eigvalsh(G))[::-1]
        s = np.sqrt(np.maximum(lam, 0.0))
        for i, v in enumerate(s, start=1):
            prof.rows.append((n, i, float(v), float(v / s[0])))
        summ.rows.append((n, d.count, float(s[0]), float(s[-1]), float(s[-1] / s[0]),
                          eps_rank_redundant(s)))
        curves[n] = s / s[0]
    onset = next((r[0] for r in sorted(summ.rows) if r[5]), None)

    def draw(path):
        fig, (ax,) = _figure()
        for n, c in curves.items():
            ax.semilogy(np.arange(1, c.size + 1), np.maximum(c, 1e-40), lw=0.8, label=f"n={n}")
        ax.axhline(EPS_DP, color="k", ls="--", lw=0.8)
        ax.set_xlabel("i")
        ax.set_ylabel("sigma_i / sigma_max")
        ax.set_title(args.dict)
        if len(curves) <= 10:
            ax.legend(fontsize=7)
        return _save_svg(fig, path)

    return RunResult([prof, summ], {"svd_profile": draw}, {"redundancy_onset": onset})


def _vwa(dict_name: str, n: int, grid, values):
    if dict_name == "fourier-ext-real":
        return fit_vwa("expi", 2 * n + 1, grid, values, offset=n)
    return fit_vwa("x", n, grid, values)


def cmd_compare_solvers(args) -> RunResult:
    """Frame solvers versus Vandermonde-with-Arnoldi on Chebyshev points."""
    f = _function(args.fn)
    m = args.m[0] if args.m else 1000
    S = deterministic_set("chebyshev", m)
    grid = S.points
    eps = args.eps
    t = Table("compare_solvers", ["n", "method", "error_sup", "coeff_norm", "skeel_cond"])
    for n in args.n:
        d = _dictionary(args.dict, n, args.W)
        A, b = build_system(d, S, f)
        runs = {
            "tikhonov-model": fit(A, b, "tikhonov", eps, dictionary=d),
            "tsvd": fit(A, b, "tsvd", eps, dictionary=d),
            "qr-orthogonalized": fit_qr_orthogonalized(d, None, S, b),
            "vwa": _vwa(args.dict, n, grid, f(grid)),
        }
        for name, r in runs.items():
            t.rows.append((n, name, error_sup(f, r), r.coeff_norm,
                           float(r.info.get("skeel_cond", math.nan))))

    def draw(path):
        fig, (ax, bx) = _figure(2)
        for meth in ("tikhonov-model", "tsvd", "qr-orthogonalized", "vwa"):
            rows = sorted(r for r in t.rows if r[1] == meth)
            ax.semilogy([r[0] for r in rows], [r[2] for r in rows], marker=".", label=meth)
        qr = sorted(r for r in t.rows if r[1] == "qr-orthogonalized")
        bx.semilogy([r[0] for r in qr], [r[4] for r in qr], marker=".")
        ax.set_xlabel("n")
        ax.set_ylabel("max error")
        ax.legend(fontsize=7)
        bx.set_xlabel("n")
        bx.set_ylabel("Skeel condition of R")
        return _save_svg(fig, path)

    return RunResult([t], {"compare_solvers": draw})


def cmd_sumframe(args) -> RunResult:
    """TSVD errors and coefficient norms in the sum frame and a comparison set."""
    f = _function(args.fn)
    m = args.m[0] if args.m else 5000
    S = deterministic_set("legendre", m)
    t = Table("sumframe", ["dict", "n", "error_l2", "coeff_norm"])
    names = [s for s in args.dict.split(",") if s]
    for name in names:
        for n in args.n:
            d = _dictionary(name, n, args.W)
            A, b = build_system(d, S, f)
            r = fit(A, b, "tsvd", args.eps, dictionary=d)
            t.rows.append((name, n, error_l2(f, r), r.coeff_norm))

    def draw(path):
        fig, (ax, bx) = _figure(2)
        for name in names:
            rows = sorted(r for r in t.rows if r[0] == name)
            ax.semilogy([r[1] for r in rows], [r[2] for r in rows], marker=".", label=name)
            bx.semilogy([r[1] for r in rows], [r[3] for r in rows], marker=".", label=name)
        ax.set_xlabel("n")
        ax.set_ylabel("L2 error")
        bx.set_xlabel("n")
        bx.set_ylabel("coefficient norm")
        ax.legend(fontsize=7)
        return _save_svg(fig, path)

    return RunResult([t], {"sumframe": draw})


def _union_samples(m1: int, m2: int):
    parts = []
    if m1:
        parts.append(deterministic_set("legendre", m1))
    if m2:
        parts.append(deterministic_set("clustered", m2))
    if not parts:
        return None
    return parts[0] if len(parts) == 1 else parts[0] + parts[1]


def cmd_stability_map(args) -> RunResult:
    """``1/sqrt(A)``, ``1/sqrt(A^eps)`` and TSVD error over (m1, m2) grids.

    ``m1`` Gauss-Legendre points plus ``m2`` points clustered towards -1,
    unit weights.  The same absolute ``eps`` drives ``A^eps`` and the TSVD
    threshold.  An empty sample set gives the zero approximant.
    """
    f = _function(args.fn)
    n = args.n[0]
    d = _dictionary(args.dict, n, args.W)
    eps = _eps(args)
    Gn = gram_continuous(d, precision="dd")
    n_eps = spectral_system(d).numerical_dimension(eps)
    m1s = args.m1
    m2s = args.m2
    ta = Table("stability_A", ["m1", "m2", "inv_sqrt_A"])
    te = Table("stability_Aeps", ["m1", "m2", "inv_sqrt_Aeps"])
    terr = Table("stability_error", ["m1", "m2", "error_sup"])
    grid = np.linspace(d.domain[0], d.domain[1], 10001)
    fmax = float(np.max(np.abs(f(grid))))
    for m1 in m1s:
        for m2 in m2s:
            S = _union_samples(m1, m2)
            if S is None:
                Gnm = np.zeros((d.count, d.count))
                err = fmax
            else:
                Gnm = gram_discrete(d, S, "dd")
                A, b = build_system(d, S, f)
                err = error_sup(f, fit(A, b, "tsvd", eps, dictionary=d), grid)
            a, ae = stability_pair(Gnm, Gn, eps)
            ta.rows.append((m1, m2, 1.0 / math.sqrt(a) if a > 0 else math.inf))
            te.rows.append((m1, m2, 1.0 / math.sqrt(ae)))
            terr.rows.append((m1, m2, err))

    def heat(table, label):
        def draw(path):
            fig, (ax,) = _figure()
            Z = np.array([[r[2] for r in sorted(table.rows) if r[0] == m1] for m1 in m1s])
            Z = np.log10(np.where(np.isfinite(Z), Z, np.nan))
            im = ax.imshow(Z, origin="lower", aspect="auto", cmap="viridis",
                           extent=(min(m2s), max(m2s), min(m1s), max(m1s)))
            im.cmap.set_bad("black")
            fig.colorbar(im, ax=ax, label=f"log10 {label}")
            m2g = np.linspace(min(m2s), max(m2s), 50)
            for level in (n, n_eps):
                ax.plot(m2g, level - m2g, color="white", lw=0.8)
            ax.set_xlim(min(m2s), max(m2s))
            ax.set_ylim(min(m1s), max(m1s))
            ax.set_xlabel("m2 (clustered)")
            ax.set_ylabel("m1 (Legendre)")
            return _save_svg(fig, path)
        return draw

    figs = {"stability_A": heat(ta, "1/sqrt(A)"), "stability_Aeps": heat(te, "1/sqrt(A^eps)"),
            "stability_error": heat(terr, "error")}
    return RunResult([ta, te, terr], figs, {"n_eps": n_eps, "eps": eps})


def cmd_numdim(args) -> RunResult:
    """Numerical dimension of the Fourier extension frame versus W."""
    n = args.n[0]
    t = Table("numdim", ["W", "eps", "n", "n_eps", "n_eps_bound", "i2_formula", "s_tail",
                         "s_tail_bound", "violations"])
    for W in args.W_list:
        sysm = prolate_eigensystem(n, W)
        for eps in args.eps_list:
            r = verify_fourier_extension(n, W, eps, system=sysm)
            t.rows.append((W, eps, n, r.n_eps, r.n_eps_bound, r.i2_formula, r.s_tail_at_i2,
                           r.s_tail_bound, r.violations))

    def draw(path):
        fig, (ax,) = _figure()
        for eps in args.eps_list:
            rows = sorted(r for r in t.rows if r[1] == eps)
            ln = ax.plot([r[0] for r in rows], [r[3] for r in rows], marker=".", label=f"eps={eps:.1e}")
            ax.plot([r[0] for r in rows], [min(r[4], 2 * n) for r in rows], ls="--",
                    color=ln[0].get_color(), lw=0.8)
        ax.axhline(n, color="k", lw=0.8)
        ax.set_xlabel("W")
        ax.set_ylabel("n^eps")
        ax.legend(fontsize=7)
        return _save_svg(fig, path)

    total = int(sum(r[8] for r in t.rows))
    return RunResult([t], {"numdim": draw}, {"violations": total})


def cmd_christoffel_growth(args) -> RunResult:
    """``||k_n||_inf`` and ``||k_n^eps||_inf`` for the Fourier extension frame."""
    W = args.W
    x = W * np.cos(np.pi * np.arange(2001)[::-1] / 2000)
    growth = Table("christoffel_growth", ["n", "eps", "k_inf", "status"])
    ratio = Table("christoffel_ratio", ["n", "ratio", "status"])
    guard = []
    for n in args.n:
        sysm = prolate_eigensystem(n, W)
        lam = sysm.values
        if lam[-1] < LAMBDA_GUARD * lam[0]:
            msg = f"n={n}: lambda_min {lam[-1]:.2e} below {LAMBDA_GUARD:.0e} lambda_max"
            guard.append(msg)
            growth.rows.append((n, 0.0, math.nan, "guard"))
            for eps in args.eps_list:
                growth.rows.append((n, eps, math.nan, "guard"))
            ratio.rows.append((n, math.nan, "guard"))
            continue
        P = sysm.projections(x)
        growth.rows.append((n, 0.0, float(np.max(P @ (1.0 / lam))), "ok"))
        for eps in args.eps_list:
            growth.rows.append((n, eps, float(np.max(P @ (1.0 / (lam + eps**2)))), "ok"))
        ratio.rows.append((n, christoffel_endpoint_ratio(n, W), "ok"))
    slopes = Table("christoffel_slopes", ["eps", "slope", "points"])
    for eps in [0.0] + list(args.eps_list):
        pts = sorted((r[0], r[2]) for r in growth.rows if r[1] == eps and r[3] == "ok")
        if len(pts) >= 2:
            sl = float(np.polyfit(np.log([p[0] for p in pts]), np.log([p[1] for p in pts]), 1)[0])
        else:
            sl = math.nan
        slopes.rows.append((eps, sl, len(pts)))

    def draw(path):
        fig, (ax,) = _figure()
        for eps in [0.0] + list(args.eps_list):
            pts = sorted((r[0], r[2]) for r in growth.rows if r[1] == eps and r[3] == "ok")
            lab = "k_n" if eps == 0 else f"k_n^eps, eps={eps:.1e}"
            ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o" if eps else None, label=lab)
        ax.set_xlabel("n")
        ax.set_ylabel("sup norm")
        ax.set_title(f"W = {W}")
        ax.legend(fontsize=7)
        return _save_svg(fig, path)

    return RunResult([growth, ratio, slopes], {"christoffel_growth": draw}, guard_violations=guard)


def cmd_random_sampling(args) -> RunResult:
    """TSVD errors from uniformly random samples, ``m = c n``."""
    f = _function(args.fn)
    eps = _eps(args)
    per = Table("random_sampling", ["n", "m", "trial", "seed", "error_l2"])
    med = Table("random_sampling_median", ["n", "m", "median_error_l2"])
    for n in args.n:
        d = _dictionary(args.dict, n, args.W)
        m = int(math.ceil(args.oversampling * n))
        dens = uniform_density(d.domain)
        errs = []
        for k in range(args.seeds):
            s = trial_seed(args.seed, k)
            S = draw_iid(dens, m, s)
            A, b = build_system(d, S, f)
            e = error_l2(f, fit(A, b, "tsvd", eps, dictionary=d))
            errs.append(e)
            per.rows.append((n, m, k, s, e))
        med.rows.append((n, m, float(np.median(errs))))

    def draw(path):
        fig, (ax,) = _figure()
        rows = sorted(med.rows)
        ax.semilogy([r[1] for r in rows], [r[2] for r in rows], marker="o")
        ax.set_xlabel("m")
        ax.set_ylabel("median L2 error")
        return _save_svg(fig, path)

    return RunResult([per, med], {"random_sampling": draw}, {"eps": eps})


def cmd_mz(args) -> RunResult:
    """Monte Carlo success rate of ``A^eps_{n,m} >= 1/2``."""
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    n = args.n[0]
    d = _dictionary(args.dict, n, args.W)
    eps = _eps(args)
    G = gram_continuous(d, precision="dd")
    n_eps = spectral_system(d).numerical_dimension(eps)
    if args.density == "uniform":
        dens = uniform_density(d.domain)
    elif args.density in ("plain", "ridge"):
        dens = optimal_density(d, G, args.density, eps if args.density == "ridge" else None)
    else:
        raise UsageError(f"unknown density {args.density!r}")
    m = args.m[0] if args.m else ridge_sample_size(n_eps, args.gamma)
    rep = mz_montecarlo(d, G, dens, m, eps, args.trials, args.seed)
    t = Table("mz", ["trial", "seed", "A_eps", "success"])
    for k, v in enumerate(rep.values):
        t.rows.append((k, trial_seed(args.seed, k), float(v), bool(v >= 0.5)))
    s = Table("mz_summary", ["n", "n_eps", "m", "gamma", "trials", "success_fraction"])
    s.rows.append((n, n_eps, m, args.gamma, args.trials, rep.success_fraction))
    return RunResult([t, s], {}, {"success_fraction": rep.success_fraction, "m": m})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, *, n="21", dict_="sumframe", fn="runge910", W=0.25, eps="auto", m=None):
    p.add_argument("--out", default=None, help="output directory (default fna-out/<subcommand>)")
    p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    p.add_argument("--precision", choices=("f64", "dd"), default="dd")
    p.add_argument("--eps", type=eps_value, default=eps, help="regularization parameter or 'auto'")
    p.add_argument("--dict", default=dict_, help="dictionary name")
    p.add_argument("--fn", default=fn, help=f"target function: {', '.join(sorted(FUNCTIONS))}")
    p.add_argument("--n", type=int_list, default=int_list(n))
    p.add_argument("--m", type=int_list, default=int_list(m) if m else None)
    p.add_argument("--W", type=float, default=W)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fna", description="Regularized frame approximation experiments.")
    parser.add_argument("--version", action="version", version=f"fna {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("svd-profile", help="singular value profiles of a dictionary")
    _common(p, n="10:30:1", dict_="fourier-ext-real")
    p.set_defaults(func=cmd_svd_profile)

    p = sub.add_parser("compare-solvers", help="frame solvers versus Vandermonde with Arnoldi")
    _common(p, n="5:100:5", dict_="fourier-ext-real", fn="runge910", m="1000")
    p.set_defaults(func=cmd_compare_solvers)

    p = sub.add_parser("sumframe", help="sum-frame convergence against a comparison set")
    _common(p, n="10:120:10", dict_="sumframe,monomial", fn="bessel-sum", m="5000")
    p.set_defaults(func=cmd_sumframe)

    p = sub.add_parser("stability-map", help="stability constants and errors over (m1, m2)")
    _common(p, n="80", dict_="sumframe", fn="bessel-sum")
    p.add_argument("--m1", type=int_list, default=int_list("0:180:20"))
    p.add_argument("--m2", type=int_list, default=int_list("0:90:10"))
    p.set_defaults(func=cmd_stability_map)

    p = sub.add_parser("numdim", help="numerical dimension of the Fourier extension frame")
    _common(p, n="141", dict_="fourier-ext")
    p.add_argument("--W-list", dest="W_list", type=float_list, default=float_list("0.05:0.45:9"))
    p.add_argument("--eps-list", dest="eps_list", type=float_list, default=[1e-6, DEFAULT_EPS])
    p.set_defaults(func=cmd_numdim)

    p = sub.add_parser("christoffel-growth", help="growth of (numerical) Christoffel functions")
    _common(p, n="21:45:4", dict_="fourier-ext", W=0.3)
    p.add_argument("--eps-list", dest="eps_list", type=float_list, default=[1e-6, DEFAULT_EPS])
    p.set_defaults(func=cmd_christoffel_growth)

    p = sub.add_parser("random-sampling", help="TSVD from uniformly random samples")
    _common(p, n="41:201:20", dict_="fourier-ext", fn="runge032", W=0.3)
    p.add_argument("--oversampling", type=float, default=4.0, help="m = oversampling * n")
    p.add_argument("--seeds", type=int, default=5, help="number of random draws per n")
    p.set_defaults(func=cmd_random_sampling)

    p = sub.add_parser("mz", help="Monte Carlo check of the ridge sample-size bound")
    _common(p, n="40", dict_="sumframe")
    p.add_argument("--density", choices=("ridge", "plain", "uniform"), default="ridge")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_mz)

    p = sub.add_parser("replay", help="re-run a manifest and compare CSV bytes")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.set_defaults(func=None)

    return parser


def _strip_out(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        out.append(tok)
    return out


def run(argv: Sequence[str], out: Path | None = None) -> tuple[int, Path | None]:
    """Run one experiment; returns ``(exit code, output directory)``."""
    parser = build_parser()
    args = parser.parse_args(list(argv))
    if args.command is None:
        raise UsageError(parser.format_usage().strip())
    if args.command == "replay":
        return _replay(args), None
    if args.seed < 0 or args.seed >= 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    outdir = Path(out or args.out or Path("fna-out") / args.command)
    outdir.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    result = args.func(args)
    files = []
    for table in result.tables:
        p = write_csv(table, outdir)
        files.append({"file": p.name, "sha256": _sha256(p)})
    for name, draw in result.figures.items():
        p = draw(outdir / f"{name}.svg")
        files.append({"file": p.name, "sha256": _sha256(p)})
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    manifest = {
        "subcommand": args.command,
        "argv": _strip_out(argv),
        "parameters": params,
        "seed": args.seed,
        "precision": args.precision,
        "version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": time.perf_counter() - t0,
        "summary": result.summary,
        "guard_violations": result.guard_violations,
        "outputs": files,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
                                          encoding="utf-8")
    for msg in result.guard_violations:
        print(f"guard: {msg}", file=sys.stderr)
    return (EXIT_GUARD if result.guard_violations else EXIT_OK), outdir


def _replay(args) -> int:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
        argv = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest {path}: {exc}") from None
    out = Path(args.out) if args.out else path.parent / "replay"
    code, outdir = run(argv, out)
    expected = {f["file"]: f["sha256"] for f in manifest["outputs"] if f["file"].endswith(".csv")}
    same = True
    for name, digest in sorted(expected.items()):
        got = _sha256(outdir / name)
        ok = got == digest
        same &= ok
        print(f"{name}: {'identical' if ok else 'DIFFERS'}")
    if not same:
        return EXIT_USAGE
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        code, outdir = run(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except OutOfRangeError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, FnaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if outdir is not None:
        print(f"wrote {outdir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
