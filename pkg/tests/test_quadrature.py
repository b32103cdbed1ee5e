import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fna import dictionaries as D, quadrature as Q, sampling, xprec


def test_gauss_small_rules():
    r = Q.gauss_legendre(1)
    assert r.nodes[0] == 0.0 and r.weights[0] == 2.0
    r = Q.gauss_legendre(2)
    assert np.allclose(np.sort(r.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=4e-16, atol=0)
    assert np.allclose(r.weights, 1.0, rtol=0, atol=1e-15)
    assert abs(Q.gauss_legendre(3).integrate(lambda x: x**4) - 0.4) <= 1e-15


@given(st.integers(min_value=1, max_value=40))
def test_gauss_exactness(N):
    r = Q.gauss_legendre(N)
    assert abs(np.sum(r.weights) - 2.0) <= 1e-14
    for k in (0, 2 * N - 2, 2 * N - 1):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(r.integrate(lambda x: x**k) - exact) <= 1e-14


def test_gauss_dd_nodes_accurate():
    r = Q.gauss_legendre(12, "dd")
    nodes = xprec.dd_to_mpf(r.nodes_dd)
    with mpmath.workdps(40):
        for x in nodes:
            assert abs(mpmath.legendre(12, x)) <= 1e-29
        wsum = sum(xprec.dd_to_mpf(r.weights_dd))
        assert abs(wsum - 2) <= 1e-29


def test_gram_continuous_legendre_identity():
    G = Q.gram_continuous(D.legendre_dict(10))
    assert np.max(np.abs(G - np.eye(10))) <= 1e-13


def test_prolate_small():
    G = Q.gram_continuous(D.fourier_ext_dict(3, 0.25), measure="lebesgue")
    assert np.allclose(np.diag(G), 0.5, rtol=0, atol=1e-16)
    assert G[0, 1] == pytest.approx(1 / np.pi, rel=1e-15)
    assert abs(G[0, 2]) <= 1e-17
    assert Q.gram_prolate(1, 0.3)[0, 0] == pytest.approx(0.6, rel=1e-15)


def test_prolate_two_by_two_eigenvalues():
    lam = np.linalg.eigvalsh(Q.gram_prolate(2, 0.25))
    assert np.allclose(lam, [0.5 - 1 / np.pi, 0.5 + 1 / np.pi], rtol=0, atol=1e-12)


def test_prolate_spectrum_in_unit_interval():
    vals = xprec.dd_sym_eig(Q.gram_prolate(21, 0.2, "dd")).values
    assert np.all((vals > 0) & (vals < 1))


@pytest.mark.parametrize("n", [5, 11, 21])
@pytest.mark.parametrize("W", [0.1, 0.3])
def test_quadrature_gram_matches_prolate(n, W):
    d = D.fourier_ext_dict(n, W)
    G = Q.gram_continuous(d, measure="lebesgue", method="quadrature")
    assert np.max(np.abs(G - Q.gram_prolate(n, W))) <= 1e-14


def test_fourier_real_closed_form_matches_quadrature():
    d = D.fourier_ext_real_dict(8)
    G1 = Q.gram_continuous(d)
    G2 = Q.gram_continuous(d, method="quadrature")
    assert np.max(np.abs(G1 - G2)) <= 1e-14


def test_sumframe_weighted_block_tridiagonal():
    d = D.sumframe_dict(8)
    G = Q.gram_continuous(d, precision="dd").to_float()
    ww = G[4:, 4:]
    # w^2 = (x+1)/2 couples Legendre neighbours only
    mask = np.abs(np.subtract.outer(np.arange(4), np.arange(4))) > 1
    assert np.max(np.abs(ww[mask])) <= 1e-15
    # dd quadrature oracle for the cross block (polynomial in t after x = 2t^2-1)
    r = Q.gauss_legendre_interval(40, 0.0, 1.0)
    t = r.nodes
    P = D.legendre_dict(4).evaluate(2 * t * t - 1)
    cross = (P * t[:, None]).T @ ((2 * t * r.weights)[:, None] * P)
    assert np.max(np.abs(G[:4, 4:] - cross)) <= 1e-14


def test_gram_discrete_exact_quadrature():
    n = 8
    r = Q.gauss_legendre(n)
    s = sampling.SampleSet(r.nodes, r.weights * n / 2.0)
    G = Q.gram_discrete(D.legendre_dict(n), s)
    assert np.max(np.abs(G - np.eye(n))) <= 1e-13


def test_gram_discrete_single_point_rank_one():
    G = Q.gram_discrete(D.legendre_dict(5), sampling.SampleSet(np.array([0.3]), np.array([1.0])))
    assert np.linalg.matrix_rank(G, tol=1e-12) == 1


def test_gram_discrete_monte_carlo():
    s = sampling.draw_iid(sampling.uniform_density(), 1000, seed=7)
    G = Q.gram_discrete(D.legendre_dict(5), s)
    assert np.linalg.norm(G - np.eye(5), 2) <= 0.2


def test_gram_discrete_rejects_empty_and_outside():
    class Empty:
        points = np.zeros(0)
        weights = np.zeros(0)

    with pytest.raises(ValueError):
        Q.gram_discrete(D.legendre_dict(3), Empty())
    with pytest.raises(ValueError):
        Q.gram_discrete(D.legendre_dict(3), sampling.SampleSet(np.array([1.5]), np.array([1.0])))


def test_gram_discrete_dd_matches_double(rng):
    s = sampling.SampleSet(rng.uniform(-1, 1, 50), rng.uniform(0.5, 2, 50))
    d = D.sumframe_dict(10)
    assert np.allclose(Q.gram_discrete(d, s, "dd").to_float(), Q.gram_discrete(d, s), atol=1e-14)


def test_gram_psd(rng):
    for d in (D.monomial_dict(20), D.sumframe_dict(30), D.fourier_ext_real_dict(12)):
        G = Q.gram_continuous(d)
        lam = np.linalg.eigvalsh(G)
        assert lam[0] >= -1e-12 * lam[-1]
        Gd = Q.gram_continuous(d, precision="dd")
        lamd = xprec.dd_sym_eig(Gd).values.to_float()
        assert lamd[0] >= -1e-28 * lamd[-1]
    s = sampling.SampleSet(rng.uniform(-1, 1, 30), np.ones(30))
    lam = np.linalg.eigvalsh(Q.gram_discrete(D.sumframe_dict(40), s))
    assert lam[0] >= -1e-12 * lam[-1]


def test_realify_duplicates_spectrum(rng):
    Z = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = Z @ Z.conj().T
    lam = np.linalg.eigvalsh(H)
    lr = np.linalg.eigvalsh(Q.realify(H))
    assert np.allclose(lr, np.repeat(lam, 2), rtol=1e-12)


def test_complex_gram_dd_realified():
    d = D.fourier_ext_dict(5, 0.3)
    s = sampling.deterministic_set("uniform-grid", 9, {"domain": (-0.3, 0.3)})
    Gd = Q.gram_discrete(d, s, "dd")
    assert Gd.shape == (10, 10)
    lam = np.linalg.eigvalsh(Gd.to_float())
    ref = np.linalg.eigvalsh(Q.gram_discrete(d, s))
    assert np.allclose(lam, np.repeat(ref, 2), atol=1e-13)


def test_synthesis_factor_reproduces_gram():
    for d in (D.sumframe_dict(12), D.legendre_dict(7), D.fourier_ext_real_dict(5)):
        A = Q.synthesis_factor(d, "double")
        G = Q.gram_continuous(d)
        assert np.max(np.abs(A.T @ A - G)) <= 1e-14
