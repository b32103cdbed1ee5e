from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fna import linalg, quadrature, xprec
from fna.errors import NotPositiveDefiniteError
from fna.xprec import DD, dd

finite = st.floats(min_value=-1e150, max_value=1e150, allow_nan=False, allow_infinity=False)


def _mp_matrix(D):
    """Exact mpmath matrix from a DD matrix."""
    return mpmath.matrix(dd_to_list(D))


def dd_to_list(D):
    arr = xprec.dd_to_mpf(D)
    return [[arr[i, j] for j in range(arr.shape[1])] for i in range(arr.shape[0])]


# -- arithmetic -------------------------------------------------------------

def test_low_word_is_captured():
    x = (dd(1e16) + 1.0) - 1e16
    assert float(x.hi) == 1.0 and float(x.lo) == 0.0


def test_sqrt_exact():
    r = dd(4.0).sqrt()
    assert float(r.hi) == 2.0 and float(r.lo) == 0.0


def test_sum_of_tenths_against_rational():
    tenth = dd(1.0) / 10.0
    s = xprec.dd_sum(DD(np.full(10**4, float(tenth.hi)), np.full(10**4, float(tenth.lo))))
    err = abs(s.to_fraction() - Fraction(1000))
    assert err <= 1e-28


def test_division_by_zero_and_negative_sqrt():
    with pytest.raises(ZeroDivisionError):
        dd(1.0) / 0.0
    with pytest.raises(ValueError):
        dd(-1.0).sqrt()


@given(finite, finite)
def test_two_sum_exact(a, b):
    s, e = xprec.two_sum(np.float64(a), np.float64(b))
    assert Fraction(float(s)) + Fraction(float(e)) == Fraction(a) + Fraction(b)


# error-free only while the product and its error term stay normal
moderate = st.floats(min_value=1e-100, max_value=1e100) | st.floats(min_value=-1e100, max_value=-1e-100)


@given(moderate, moderate)
def test_two_prod_exact(a, b):
    p, e = xprec.two_prod(np.float64(a), np.float64(b))
    assert Fraction(float(p)) + Fraction(float(e)) == Fraction(a) * Fraction(b)


@given(st.floats(min_value=1e-100, max_value=1e100), st.floats(min_value=1e-100, max_value=1e100))
def test_ops_relative_error(a, b):
    x = dd(a) / 3.0
    y = dd(b) / 7.0
    X, Y = x.to_fraction(), y.to_fraction()
    for got, exact in [(x + y, X + Y), (x * y, X * Y), (x / y, X / Y)]:
        rel = abs(got.to_fraction() - exact) / abs(exact)
        assert rel <= 4 * xprec.U_DD


@given(finite)
def test_round_trip(a):
    assert float(dd(a)) == a


# -- eigensolver -------------------------------------------------------------

def test_diag_eigenvalues():
    v = xprec.dd_sym_eig(xprec.DD(np.diag([1.0, 1e-25, 3.0]))).values
    assert np.array_equal(v.to_float(), [1e-25, 1.0, 3.0])


def test_hilbert4_smallest_eigenvalue():
    H = DD(np.zeros((4, 4)))
    for i in range(4):
        for j in range(4):
            H[i, j] = dd(1.0) / (i + j + 1)
    lam = xprec.dd_sym_eig(H).values
    with mpmath.workdps(50):
        Hm = mpmath.matrix(4, 4)
        for i in range(4):
            for j in range(4):
                Hm[i, j] = mpmath.mpf(1) / (i + j + 1)
        exact = mpmath.eigsy(Hm)[0][0]
        assert abs(xprec.dd_to_mpf(lam[0]) - exact) <= 1e-28 * exact
    # the quoted reference value is itself only good to about 1e-12 relative
    assert float(lam[0]) == pytest.approx(9.6702304022603313e-5, rel=1e-12)


def test_prolate_spectrum_in_unit_interval():
    n, W = 25, 0.3
    G = quadrature.gram_prolate(n, W, precision="dd")
    vals = xprec.dd_sym_eig(G).values
    assert np.all((vals > 0) & (vals < 1))
    lam = vals.to_float()[::-1]
    tail = lam[int(np.ceil(2 * n * W)):]
    assert np.all(np.diff(tail) < 0)
    ref = linalg.sym_eig(G.to_float()).values[::-1]
    big = ref > 1e-12
    assert np.allclose(lam[big], ref[big], rtol=0, atol=1e-13)


def test_agrees_with_double_solver(rng):
    A = rng.standard_normal((12, 12))
    S = A + A.T
    S[0] *= 1e-3
    S[:, 0] *= 1e-3
    lam = xprec.dd_sym_eig(S).values.to_float()
    ref = linalg.sym_eig(S).values
    keep = np.abs(ref) >= 1e-12 * np.linalg.norm(S, 2)
    assert np.allclose(lam[keep], ref[keep], rtol=1e-12, atol=0)


def test_eigenvalue_sum_equals_trace(rng):
    A = rng.standard_normal((15, 15))
    S = xprec.dd_matmul(DD(A), DD(A.T))
    lam = xprec.dd_sym_eig(S).values
    diff = xprec.dd_sum(lam) - xprec.dd_sum(S.diagonal())
    assert abs(float(diff)) <= 1e-27 * np.linalg.norm(S.to_float(), 2)


def test_eigenvectors_residual(rng):
    A = rng.standard_normal((8, 8))
    S = DD(A + A.T)
    r = xprec.dd_sym_eig(S, vectors=True)
    R = xprec.dd_matmul(S, r.vectors) - r.vectors * r.values.reshape(1, -1)
    assert np.max(np.abs(R.to_float())) <= 1e-28 * np.linalg.norm(A + A.T, 2)


# -- Cholesky solves ----------------------------------------------------------

def test_cholesky_solve_identity():
    x = xprec.dd_cholesky_solve(xprec.dd_eye(3), 0.0, DD(np.array([1.0, 0, 0])))
    assert np.array_equal(x.to_float(), [1.0, 0.0, 0.0])


def test_cholesky_solve_tiny_diagonal():
    S = DD(np.diag([1e-31, 1.0]))
    x = xprec.dd_cholesky_solve(S, 1e-30, DD(np.array([1.0, 1.0])))
    X = xprec.dd_to_mpf(x)
    with mpmath.workdps(40):
        ref = [1 / (mpmath.mpf(1e-31) + mpmath.mpf(1e-30)), 1 / (1 + mpmath.mpf(1e-30))]
        for a, b in zip(X, ref):
            assert abs(a - b) / b <= 1e-30


def test_cholesky_solve_random_spd(rng):
    A = rng.standard_normal((10, 10))
    S = xprec.dd_matmul(DD(A), DD(A.T)) + 0.1
    b = DD(rng.standard_normal(10))
    x = xprec.dd_cholesky_solve(S, 0.0, b)
    with mpmath.workdps(60):
        Sm = _mp_matrix(S)
        bm = mpmath.matrix(list(xprec.dd_to_mpf(b)))
        ref = mpmath.lu_solve(Sm, bm)
        X = xprec.dd_to_mpf(x)
        err = max(abs(X[i] - ref[i]) for i in range(10)) / max(abs(ref[i]) for i in range(10))
        res = Sm * mpmath.matrix(list(X)) - bm
        rnorm = max(abs(res[i]) for i in range(10)) / max(abs(bm[i]) for i in range(10))
    assert err <= 1e-24
    assert rnorm <= 1e-25


def test_cholesky_not_pd_reports_pivot():
    with pytest.raises(NotPositiveDefiniteError) as exc:
        xprec.dd_cholesky(DD(np.diag([1.0, -2.0, 3.0])))
    assert exc.value.index == 1 and exc.value.pivot == -2.0


# -- SVD ----------------------------------------------------------------------

def test_dd_svd_against_mpmath(rng):
    A = rng.standard_normal((9, 6)) * np.logspace(0, -12, 6)
    r = xprec.dd_svd(DD(A))
    with mpmath.workdps(50):
        ref = sorted((float(s) for s in mpmath.svd_r(mpmath.matrix(A.tolist()), compute_uv=False)),
                     reverse=True)
    assert np.allclose(r.S.to_float(), ref, rtol=1e-14, atol=0)
    rec = xprec.dd_matmul(r.U * r.S.reshape(1, -1), r.V.T) - DD(A)
    assert np.max(np.abs(rec.to_float())) <= 1e-28 * np.max(np.abs(A))
