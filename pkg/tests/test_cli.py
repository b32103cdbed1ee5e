import json
import math
import re

import numpy as np
import pytest

from fna import cli
from fna.dictionaries import sumframe_dict
from fna.linalg import EPS_DP
from fna.quadrature import gram_continuous

FLOAT = re.compile(r"^-?\d(\.\d+)?(e[+-]\d+)?$|^-?(nan|inf)$")


def _run(tmp_path, *argv):
    code, out = cli.run(list(argv), tmp_path / argv[0])
    return code, out


def test_csv_format(tmp_path):
    t = cli.Table("t", ["a", "b", "c"], [(2, 0.1, "x"), (1, 1 / 3, "y"), (1, math.nan, "z")])
    p = cli.write_csv(t, tmp_path)
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "a,b,c"
    assert lines[1:] == ["1,0.33333333333333331,y", "1,nan,z", "2,0.10000000000000001,x"]
    assert float(lines[1].split(",")[1]) == 1 / 3


def test_format_value():
    assert cli.format_value(True) == "1"
    assert cli.format_value(np.int64(3)) == "3"
    assert cli.format_value(2.0) == "2"
    assert float(cli.format_value(np.pi)) == np.pi


def test_list_parsers():
    assert cli.int_list("21:45:4") == [21, 25, 29, 33, 37, 41, 45]
    assert cli.int_list("3,5") == [3, 5]
    assert cli.float_list("0.1:0.3:3") == pytest.approx([0.1, 0.2, 0.3])
    assert cli.eps_value("auto") == "auto"
    with pytest.raises(Exception):
        cli.eps_value("-1")


def test_svd_profile_legendre_flat(tmp_path):
    code, out = _run(tmp_path, "svd-profile", "--dict", "legendre", "--n", "5,8")
    assert code == 0
    rows = cli.read_csv(out / "svd_profile.csv")
    assert len(rows) == 13
    assert all(abs(float(r["sigma"]) - 1) <= 1e-13 for r in rows)
    for r in rows:
        assert FLOAT.match(r["sigma"])
    assert (out / "svd_profile.svg").read_text().startswith("<?xml")
    m = json.loads((out / "manifest.json").read_text())
    assert m["subcommand"] == "svd-profile" and m["seed"] == 0 and m["precision"] == "dd"
    assert {f["file"] for f in m["outputs"]} >= {"svd_profile.csv", "svd_summary.csv", "svd_profile.svg"}


def test_svg_self_contained(tmp_path):
    _, out = _run(tmp_path, "svd-profile", "--dict", "monomial", "--n", "6")
    svg = (out / "svd_profile.svg").read_text()
    assert "xlink:href=\"http" not in svg and "<image" not in svg


def test_svd_profile_fourier_real_onset(tmp_path):
    _, out = _run(tmp_path, "svd-profile", "--n", "16:24:1")
    m = json.loads((out / "manifest.json").read_text())
    assert abs(m["summary"]["redundancy_onset"] - 20) <= 2


def test_replay_identical(tmp_path):
    code, out = _run(tmp_path, "mz", "--n", "10", "--trials", "3", "--m", "40", "--seed", "11")
    assert code == 0
    assert cli.run(["replay", str(out / "manifest.json")])[0] == 0
    for name in ("mz.csv", "mz_summary.csv"):
        assert (out / name).read_bytes() == (out / "replay" / name).read_bytes()


def test_replay_detects_change(tmp_path):
    _, out = _run(tmp_path, "mz", "--n", "10", "--trials", "2", "--m", "30")
    mpath = out / "manifest.json"
    m = json.loads(mpath.read_text())
    for f in m["outputs"]:
        f["sha256"] = "0" * 64
    mpath.write_text(json.dumps(m))
    assert cli.run(["replay", str(mpath)])[0] == cli.EXIT_USAGE


def test_seed_changes_draws(tmp_path):
    _, a = cli.run(["mz", "--n", "10", "--trials", "2", "--m", "30", "--seed", "1"], tmp_path / "a")
    _, b = cli.run(["mz", "--n", "10", "--trials", "2", "--m", "30", "--seed", "2"], tmp_path / "b")
    assert (a / "mz.csv").read_bytes() != (b / "mz.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["mz", "--trials", "0", "--out", str(tmp_path / "x")]) == 1
    assert cli.main(["no-such-command"]) == 1
    assert cli.main([]) == 1
    assert cli.main(["svd-profile", "--dict", "wavelet", "--out", str(tmp_path / "y")]) == 1
    assert cli.main(["svd-profile", "--seed", "-1", "--out", str(tmp_path / "y")]) == 1
    assert cli.main(["--version"]) == 0
    code = cli.main(["christoffel-growth", "--n", "21,61", "--out", str(tmp_path / "g")])
    assert code == 2
    assert "guard" in capsys.readouterr().err
    rows = cli.read_csv(tmp_path / "g" / "christoffel_ratio.csv")
    assert [r["status"] for r in rows] == ["ok", "guard"]


def test_christoffel_growth_tables(tmp_path):
    code, out = _run(tmp_path, "christoffel-growth", "--n", "21,25,29", "--eps-list", "1e-6")
    assert code == 0
    rows = cli.read_csv(out / "christoffel_growth.csv")
    k = {(int(r["n"]), float(r["eps"])): float(r["k_inf"]) for r in rows}
    for n in (21, 25, 29):
        assert k[(n, 1e-6)] <= k[(n, 0.0)]
    for r in cli.read_csv(out / "christoffel_ratio.csv"):
        assert 0.5 <= float(r["ratio"]) <= 1.5


def test_stability_map_empty_cell(tmp_path):
    code, out = _run(tmp_path, "stability-map", "--n", "10", "--m1", "0,20", "--m2", "0,5")
    assert code == 0
    a = {(int(r["m1"]), int(r["m2"])): float(r["inv_sqrt_A"]) for r in cli.read_csv(out / "stability_A.csv")}
    e = {(int(r["m1"]), int(r["m2"])): float(r["inv_sqrt_Aeps"])
         for r in cli.read_csv(out / "stability_Aeps.csv")}
    assert math.isinf(a[(0, 0)])
    # no samples: A^eps = eps^2 / lambda_max(G_n)
    lam_max = np.linalg.eigvalsh(gram_continuous(sumframe_dict(10)))[-1]
    assert e[(0, 0)] == pytest.approx(math.sqrt(lam_max) / (10 * EPS_DP), rel=1e-12)
    assert e[(20, 5)] <= a[(20, 5)] * (1 + 1e-8)
    err = {(int(r["m1"]), int(r["m2"])): float(r["error_sup"]) for r in cli.read_csv(out / "stability_error.csv")}
    assert err[(0, 0)] > 0.1 and err[(20, 5)] < 1e-2


def test_numdim_no_violations(tmp_path):
    code, out = _run(tmp_path, "numdim", "--n", "41", "--W-list", "0.1,0.3", "--eps-list", "1e-6")
    assert code == 0
    for r in cli.read_csv(out / "numdim.csv"):
        assert int(r["violations"]) == 0
        assert float(r["n_eps"]) <= min(float(r["n_eps_bound"]), 41)


def test_compare_solvers_small_n_agree(tmp_path):
    _, out = _run(tmp_path, "compare-solvers", "--n", "4,8")
    rows = cli.read_csv(out / "compare_solvers.csv")
    for n in ("4", "8"):
        errs = [float(r["error_sup"]) for r in rows if r["n"] == n]
        assert len(errs) == 4
        assert max(errs) - min(errs) <= 1e-10


def test_random_sampling_negative_control(tmp_path):
    # at W = 0.3 the effective dimension is about 0.6 n: m = n stalls, m = n/2 fails outright
    errs = {}
    for c in ("1", "0.5"):
        _, out = cli.run(["random-sampling", "--n", "41,81", "--oversampling", c, "--seeds", "5"],
                         tmp_path / c)
        errs[c] = [float(r["median_error_l2"]) for r in cli.read_csv(out / "random_sampling_median.csv")]
    assert min(errs["1"]) > 1e-6
    assert min(errs["0.5"]) > 0.1
