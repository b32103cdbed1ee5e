import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fna import analysis, dictionaries as D, sampling as S, solvers as F
from fna.errors import RankDeficientError
from fna.linalg import EPS_DP


def _cheb_set(m=1000):
    return S.deterministic_set("chebyshev", m)


# -- system assembly -----------------------------------------------------------------

def test_build_system_consistent_for_span_element():
    d = D.legendre_dict(6)
    s = S.deterministic_set("uniform-grid", 50)
    c = np.arange(1.0, 7.0)
    A, data = F.build_system(d, s, lambda x: d.synthesize(c, x))
    res = F.fit(A, data, "ls", dictionary=d)
    assert res.residual <= 1e-13
    assert np.allclose(res.coeffs, c, rtol=1e-12)


def test_build_system_zero_function_gives_noise():
    d = D.legendre_dict(4)
    s = S.deterministic_set("uniform-grid", 9)
    noise = np.linspace(-1, 1, 9) * 1e-3
    _, data = F.build_system(d, s, lambda x: np.zeros_like(x), noise)
    assert np.array_equal(data, noise)
    with pytest.raises(ValueError):
        F.build_system(d, s, lambda x: x, np.zeros(3))


def test_build_system_gauss_nodes_orthonormal():
    s = analysis.quadrature_samples(3)
    A, _ = F.build_system(D.legendre_dict(3), s, lambda x: x)
    assert np.max(np.abs(A.T @ A - np.eye(3))) <= 1e-14


# -- fit -----------------------------------------------------------------------------

def test_ls_refuses_rank_deficient():
    A, data = F.build_system(D.fourier_ext_real_dict(30), _cheb_set(), F.runge910)
    with pytest.raises(RankDeficientError):
        F.fit(A, data, "ls")


def test_tsvd_below_sigma_min_is_ls(rng):
    A = rng.standard_normal((30, 8))
    b = rng.standard_normal(30)
    x_ls = F.fit(A, b, "ls").coeffs
    x_t = F.fit(A, b, "tsvd", eps=1e-6).coeffs
    assert np.allclose(x_t, x_ls, rtol=1e-13)


def test_tikhonov_huge_eps(rng):
    A = rng.standard_normal((20, 10))
    A /= np.linalg.norm(A, 2)
    b = rng.standard_normal(20)
    x = F.fit(A, b, "tikhonov", eps=1e8).coeffs
    assert np.linalg.norm(x) <= 1e-15 * np.linalg.norm(b)


def test_regularized_methods_need_eps(rng):
    A = rng.standard_normal((5, 3))
    with pytest.raises(ValueError):
        F.fit(A, np.ones(5), "tsvd", eps=0.0)
    with pytest.raises(ValueError):
        F.fit(A, np.ones(5), "cg", eps=1e-3)


def test_default_eps():
    A = np.diag([3.0, 1.0])
    assert F.fit(A, np.ones(2), "tsvd").eps == pytest.approx(30 * EPS_DP, rel=1e-14)


@given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(min_value=1e-10, max_value=1.0))
def test_tsvd_coefficients_bounded(seed, eps):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((15, 10)) * np.logspace(0, -14, 10)
    b = rng.standard_normal(15)
    x = F.fit(A, b, "tsvd", eps=eps).coeffs
    assert np.linalg.norm(x) <= np.linalg.norm(b) / eps * (1 + 1e-12)


def test_fit_deterministic():
    A, data = F.build_system(D.sumframe_dict(40), S.deterministic_set("legendre", 200), F.bessel_sum)
    r1 = F.fit(A, data, "tsvd")
    r2 = F.fit(A, data, "tsvd")
    assert r1.coeffs.tobytes() == r2.coeffs.tobytes()
    assert (r1.residual, r1.coeff_norm, r1.eps) == (r2.residual, r2.coeff_norm, r2.eps)


# -- orthogonalized and Arnoldi fits ---------------------------------------------------

def test_qr_orthogonalized_matches_ls_for_legendre():
    d = D.legendre_dict(10)
    s = _cheb_set(200)
    A, data = F.build_system(d, s, F.runge910)
    r = F.fit_qr_orthogonalized(d, None, s, data)
    ref = F.fit(A, data, "ls")
    assert np.allclose(r.coeffs, ref.coeffs, rtol=0, atol=1e-12 * np.linalg.norm(ref.coeffs))


def test_qr_skeel_grows_for_fourier_real():
    s = _cheb_set()
    sk = []
    for n in (5, 10, 20, 30):
        d = D.fourier_ext_real_dict(n)
        _, data = F.build_system(d, s, F.runge910)
        sk.append(F.fit_qr_orthogonalized(d, None, s, data).info["skeel_cond"])
    assert np.all(np.diff(sk) > 0)


def test_qr_orthogonalized_behaves_like_regularized():
    s = _cheb_set()
    n = 30
    d = D.fourier_ext_real_dict(n)
    A, data = F.build_system(d, s, F.runge910)
    e_qr = F.error_sup(F.runge910, F.fit_qr_orthogonalized(d, None, s, data))
    e_ts = F.error_sup(F.runge910, F.fit(A, data, "tsvd", dictionary=d))
    e_vwa = F.error_sup(F.runge910, F.fit_vwa("expi", 2 * n + 1, s.points, F.runge910(s.points), offset=n))
    assert e_vwa < 1e-2 * min(e_qr, e_ts)


def test_vwa_exact_for_linear():
    grid = np.linspace(-1, 1, 101)
    r = F.fit_vwa("x", 2, grid, grid)
    assert r.residual <= 1e-14
    assert np.max(np.abs(F.evaluate(r, np.array([-0.7, 0.2, 1.0])) - [-0.7, 0.2, 1.0])) <= 1e-14


def test_vwa_single_function_is_mean():
    grid = np.linspace(-1, 1, 51)
    data = np.exp(grid)
    r = F.fit_vwa("x", 1, grid, data)
    assert np.allclose(F.evaluate(r, grid), data.mean(), rtol=1e-14)


def test_vwa_two_step_by_hand():
    # q0 = 1, q1 = x / ||x|| on the grid with uniform weights
    grid = np.array([-1.0, 0.0, 1.0])
    b = D.stieltjes_orthonormalize(2, "x", (grid, np.full(3, 1 / 3)))
    assert b.H[0, 0] == pytest.approx(0.0, abs=1e-16)
    assert b.H[1, 0] == pytest.approx(np.sqrt(2 / 3), rel=1e-15)


def test_vwa_exponential_convergence_past_redundancy():
    s = _cheb_set()
    errs = []
    for n in (10, 20, 30, 40):
        r = F.fit_vwa("expi", 2 * n + 1, s.points, F.runge910(s.points), offset=n)
        errs.append(F.error_sup(F.runge910, r))
    assert np.all(np.diff(np.log10(errs)) < -1)


def test_vwa_grid_too_small():
    with pytest.raises(ValueError):
        F.fit_vwa("x", 5, np.linspace(-1, 1, 3), np.zeros(3))


# -- evaluation and errors -------------------------------------------------------------------

def test_zero_coefficients():
    d = D.legendre_dict(5)
    res = F.ApproxResult(np.zeros(5), d, "none", 0.0, 0.0, 0.0)
    x = np.linspace(-1, 1, 7)
    assert np.all(F.evaluate(res, x) == 0)
    assert F.error_l2(F.runge910, res) == pytest.approx(F.norm_l2(F.runge910), rel=1e-14)
    assert F.error_sup(F.runge910, res) == pytest.approx(1.0, rel=1e-14)


def test_exact_fit_errors_small():
    d = D.legendre_dict(8)
    c = np.linspace(1, -1, 8)
    f = lambda x: d.synthesize(c, x)  # noqa: E731
    A, data = F.build_system(d, analysis.quadrature_samples(10), f)
    res = F.fit(A, data, "tsvd", dictionary=d)
    assert F.error_l2(f, res) <= 1e-13
    assert F.error_sup(f, res) <= 1e-13


def test_bessel_sum_closed_form():
    from scipy.special import jv

    x = np.linspace(-0.9, 1, 9)
    assert np.allclose(F.bessel_sum(x), jv(0.5, x + 1) + 1 / (x * x + 1), rtol=1e-13)


# -- bounds -------------------------------------------------------------------------------

def test_tsvd_error_bound_witnesses():
    n = 40
    d = D.sumframe_dict(n)
    s = analysis.quadrature_samples(2 * n)
    A, data = F.build_system(d, s, F.bessel_sum)
    res = F.fit(A, data, "tsvd", dictionary=d)
    assert res.eps >= 10 * EPS_DP * res.info["sigma_max"] * (1 - 1e-15)
    err = F.error_l2(F.bessel_sum, res)
    f_norm = F.norm_l2(F.bessel_sum)
    ref = F.fit_dd_reference(d, s, F.bessel_sum)
    witnesses = [np.zeros(n)] + [np.where(np.arange(n) < k, ref.coeffs, 0.0) for k in (5, 10, 20)]
    witnesses.append(ref.coeffs)
    for x in witnesses:
        w = F.ApproxResult(x, d, "witness", 0.0, 0.0, float(np.linalg.norm(x)))
        bound = analysis.tsvd_error_bound(F.error_l2(F.bessel_sum, w), res.eps, np.linalg.norm(x), f_norm)
        assert err <= bound


def test_sumframe_beats_monomial():
    s = S.deterministic_set("legendre", 5000)
    errs = {}
    for name in ("sumframe", "monomial"):
        d = D.from_name(name, 60)
        A, data = F.build_system(d, s, F.bessel_sum)
        errs[name] = F.error_l2(F.bessel_sum, F.fit(A, data, "tsvd", dictionary=d))
    assert errs["sumframe"] <= 1e-12 < 1e-8 <= errs["monomial"]
