"""Acceptance criteria 1-11.

Experiment criteria run through the CLI and assert on its CSV output.  Each
test records ``(passed, detail)`` in ``conftest.ACCEPTANCE``; the terminal
summary prints one line per criterion.
"""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE
from fna import analysis as AN, cli, dictionaries as D, quadrature as Q
from fna.linalg import EPS_DP

HERE = Path(__file__).parent


def _record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _cli(tmp_path_factory, *argv):
    out = tmp_path_factory.mktemp(argv[0])
    code, outdir = cli.run(list(argv), out)
    return code, outdir


def test_criterion_01_prolate_closed_form():
    lam = np.sort(np.linalg.eigvalsh(Q.gram_prolate(2, 0.25)))
    err_eig = float(np.max(np.abs(lam - [0.5 - 1 / np.pi, 0.5 + 1 / np.pi])))
    err_gram = 0.0
    for n in (5, 11, 21):
        for W in (0.1, 0.3):
            G = Q.gram_continuous(D.fourier_ext_dict(n, W), measure="lebesgue", method="quadrature")
            err_gram = max(err_gram, float(np.max(np.abs(G - Q.gram_prolate(n, W)))))
    ok = err_eig <= 1e-12 and err_gram <= 1e-14
    _record(1, ok, f"eigenvalue error {err_eig:.1e} (tol 1e-12), Gram error {err_gram:.1e} (tol 1e-14)")


def test_criterion_02_numerical_dimension_bounds(tmp_path_factory):
    bad = []
    rows = 0
    for n in (41, 61, 81, 101, 121, 141):
        _, out = _cli(tmp_path_factory, "numdim", "--n", str(n), "--W-list", "0.1,0.2,0.3,0.4",
                      "--eps-list", "1e-6,2e-15")
        for r in cli.read_csv(out / "numdim.csv"):
            rows += 1
            if int(r["violations"]) or float(r["n_eps"]) > n:
                bad.append((n, r["W"], r["eps"]))
    _record(2, not bad and rows == 48, f"{rows} (n, W, eps) cases, violations: {bad or 'none'}")


def test_criterion_03_sumframe_numerical_dimension():
    n_eps = AN.spectral_system(D.sumframe_dict(80)).numerical_dimension(10 * EPS_DP)
    _record(3, abs(n_eps - 54.8) <= 0.5, f"n^eps = {n_eps:.4f} (target 54.8 +- 0.5)")


def test_criterion_04_redundancy_onset(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "svd-profile", "--dict", "fourier-ext-real", "--n", "10:30:1")
    rows = sorted(cli.read_csv(out / "svd_summary.csv"), key=lambda r: int(r["n"]))
    red = [int(r["n"]) for r in rows if float(r["sigma_min"]) <= EPS_DP * float(r["sigma_max"])]
    onset = red[0] if red else None
    _record(4, onset is not None and abs(onset - 20) <= 2, f"first redundant n = {onset} (target 20 +- 2)")


def test_criterion_05_solver_comparison(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "compare-solvers", "--n", "5:100:5")
    rows = cli.read_csv(out / "compare_solvers.csv")
    err = {(int(r["n"]), r["method"]): float(r["error_sup"]) for r in rows}
    best_vwa = min(v for (n, m), v in err.items() if m == "vwa")
    vwa60 = err[(60, "vwa")]
    others = {m: err[(60, m)] for m in ("tsvd", "tikhonov-model", "qr-orthogonalized")}
    ratio = min(others.values()) / vwa60
    ok = best_vwa <= 1e-10 and ratio >= 1e2
    _record(5, ok, f"best VwA error {best_vwa:.1e}; at n=60 VwA {vwa60:.1e}, "
                   f"smallest other {min(others.values()):.1e} (ratio {ratio:.1e}, need 1e2)")


def test_criterion_06_sumframe_convergence(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "sumframe", "--dict", "sumframe,monomial", "--n", "10:120:10",
                  "--m", "5000")
    rows = cli.read_csv(out / "sumframe.csv")
    sf = min(float(r["error_l2"]) for r in rows if r["dict"] == "sumframe")
    mono = min(float(r["error_l2"]) for r in rows if r["dict"] == "monomial")
    _record(6, sf <= 1e-12 and mono >= 1e-8,
            f"sumframe best {sf:.1e} (need <= 1e-12), monomial best {mono:.1e} (need >= 1e-8)")


def test_criterion_07_stability_map(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "stability-map", "--n", "80", "--m1", "0:180:20", "--m2", "0:90:10")
    key = lambda r: (int(r["m1"]), int(r["m2"]))  # noqa: E731
    ae = {key(r): float(r["inv_sqrt_Aeps"]) for r in cli.read_csv(out / "stability_Aeps.csv")}
    err = {key(r): float(r["error_sup"]) for r in cli.read_csv(out / "stability_error.csv")}
    stable_bad = [c for c in ae if ae[c] <= 10 and err[c] > 1e-9]
    unstable_bad = [c for c in ae if ae[c] >= 1e6 and err[c] <= 1e-10]
    n_stable = sum(1 for c in ae if ae[c] <= 10)
    ok = len(ae) == 100 and not stable_bad and not unstable_bad
    _record(7, ok, f"{n_stable} cells with 1/sqrt(A^eps) <= 10; offending stable {stable_bad or 'none'}, "
                   f"offending unstable {unstable_bad or 'none'}")


def test_criterion_08_christoffel_growth(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "christoffel-growth", "--W", "0.3", "--n", "21:81:4", "--eps-list", "1e-6")
    slopes = {float(r["eps"]): float(r["slope"]) for r in cli.read_csv(out / "christoffel_slopes.csv")}
    ratio = sorted((int(r["n"]), float(r["ratio"])) for r in cli.read_csv(out / "christoffel_ratio.csv")
                   if r["status"] == "ok")
    ok_n = [n for n, _ in ratio]
    vals = np.array([v for _, v in ratio])
    s0, s1 = slopes[0.0], slopes[1e-6]
    increasing = bool(np.all(np.diff(vals) > 0))
    bracket = bool(np.all((vals >= 0.5) & (vals <= 1.5)))
    ok = 1.8 <= s0 <= 2.2 and 0.8 <= s1 <= 1.3 and increasing and bracket
    _record(8, ok, f"computable n {ok_n[0]}..{ok_n[-1]}; slope k_n {s0:.3f} [1.8,2.2], "
                   f"slope k_n^eps {s1:.3f} [0.8,1.3]; ratio {vals[0]:.5f} -> {vals[-1]:.5f}, "
                   f"increasing={increasing}, in [0.5,1.5]={bracket}")


def test_criterion_09_random_sampling(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "random-sampling", "--fn", "runge032", "--W", "0.3", "--eps", "auto",
                  "--oversampling", "4", "--n", "41:201:20", "--seeds", "5")
    med = sorted((int(r["n"]), float(r["median_error_l2"]))
                 for r in cli.read_csv(out / "random_sampling_median.csv"))
    errs = np.array([e for _, e in med])
    ups = int(np.sum(np.diff(errs) > 0))
    allowed = math.floor(0.2 * (errs.size - 1))
    final = dict(med)[201]
    ok = final <= 1e-8 and ups <= allowed
    _record(9, ok, f"median error at n=201 {final:.1e} (need <= 1e-8); non-decreasing steps {ups} of "
                   f"{errs.size - 1} (allowed {allowed}); errors " + " ".join(f"{e:.1e}" for e in errs))


def test_criterion_10_ridge_sampling(tmp_path_factory):
    _, out = _cli(tmp_path_factory, "mz", "--dict", "sumframe", "--n", "40", "--density", "ridge",
                  "--gamma", "0.1", "--trials", "100", "--seed", "0")
    s = cli.read_csv(out / "mz_summary.csv")[0]
    n_eps = float(s["n_eps"])
    m = int(s["m"])
    frac = float(s["success_fraction"])
    ok = m == math.ceil(32 / 3 * n_eps * math.log(16 * n_eps / 0.1)) and int(s["trials"]) == 100 and frac >= 0.9
    _record(10, ok, f"n^eps = {n_eps:.3f}, m = {m}, success fraction {frac:.2f} over 100 trials (need >= 0.9)")


PROPERTY_FILES = ["test_linalg.py", "test_xprec.py", "test_dictionaries.py", "test_quadrature.py",
                  "test_sampling.py", "test_solvers.py", "test_analysis.py"]


def test_criterion_11_property_suites():
    files = [str(HERE / f) for f in PROPERTY_FILES]
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *files],
                          capture_output=True, text=True, cwd=HERE.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    _record(11, proc.returncode == 0, f"{len(files)} property modules: {tail}")
