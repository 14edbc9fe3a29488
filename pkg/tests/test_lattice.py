"""Quasi-periodic lattice Green's functions: plain sums, Ewald sums and series terms."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_bem.kernels import LameParams, fundamental_matrix, kelvin_matrix
from phonon_bem.lattice import (
    DEFAULT_CFG,
    LatticeKernel,
    LatticeSumConfig,
    ResonanceError,
    check_resonance,
    periodic_green_static,
    qp_green,
    qp_green_regular,
    qp_green_series_term,
    qp_green_static,
    qp_traction,
    qp_traction_regular,
    tau_l,
)

P = LameParams(1.0, 1.0)
ALPHA = (1.0, 2.0)


def test_quasi_periodicity_plain_sum():
    cfg = LatticeSumConfig(M=40)
    d = np.array([0.23, -0.31])
    g = qp_green(d, ALPHA, 1.5, P, cfg)
    for j, e in enumerate(np.eye(2)):
        g2 = qp_green(d + e, ALPHA, 1.5, P, cfg)
        assert np.abs(g2 - np.exp(1j * ALPHA[j]) * g).max() <= 1e-9 * np.abs(g).max()


def test_conjugation_symmetry():
    d = np.array([[0.2, 0.1]])
    a = np.array(ALPHA)
    # -alpha is represented by 2 pi - alpha; the Ewald sum is truncation-free
    G = LatticeKernel.build("helmholtz", tuple(a), 2.0, P).full(d, np.zeros((1, 2)))[0][0, 0]
    Gm = LatticeKernel.build("helmholtz", tuple(2 * np.pi - a), 2.0, P).full(d, np.zeros((1, 2)))[0][0, 0]
    assert np.abs(Gm - G.conj()).max() < 1e-12
    # the plain box sums differ by one shell, so they agree only to the tail estimate
    g, tail = qp_green(d[0], tuple(a), 2.0, P, return_tail=True)
    gm = qp_green(d[0], tuple(2 * np.pi - a), 2.0, P)
    assert np.abs(gm - g.conj()).max() < 2 * tail + 1e-4


def test_ewald_matches_plain_sum_within_tail():
    ker = LatticeKernel.build("helmholtz", ALPHA, 2.5, P)
    d = np.array([[0.21, 0.13], [-0.4, 0.35], [0.05, -0.02]])
    G, _ = ker.full(d, np.zeros((1, 2)))
    for k in range(3):
        plain, tail = qp_green(d[k], ALPHA, 2.5, P, return_tail=True)
        assert np.abs(G[k, 0] - plain).max() <= tail
        # the plain sums approach the Ewald value, if slowly and not monotonically
        plain320 = qp_green(d[k], ALPHA, 2.5, P, LatticeSumConfig(M=320))
        assert np.abs(G[k, 0] - plain320).max() < 1e-5


def test_truncation_change_below_tail_estimate():
    d = np.array([0.3, 0.2])
    g40, tail = qp_green(d, ALPHA, 1.7, P, LatticeSumConfig(M=40), return_tail=True)
    g80 = qp_green(d, ALPHA, 1.7, P, LatticeSumConfig(M=80))
    assert np.abs(g80 - g40).max() < tail


def test_ewald_traction_matches_plain():
    ker = LatticeKernel.build("helmholtz", ALPHA, 2.5, P)
    d = np.array([[0.21, 0.13]])
    n = np.array([[0.6, 0.8]])
    _, T = ker.full(d, np.zeros((1, 2)), n)
    # the differentiated plain series converges like 1/M
    errs = [np.abs(T[0, 0] - qp_traction(d[0], n[0], ALPHA, 2.5, P, LatticeSumConfig(M=M))).max() for M in (40, 320)]
    assert errs[1] < errs[0] / 4
    assert errs[1] < 1e-3 * np.abs(T[0, 0]).max()


def test_pde_residual_of_lattice_green():
    cfg = DEFAULT_CFG
    ker = LatticeKernel.build("helmholtz", ALPHA, 2.0, P, cfg)
    x0 = np.array([0.31, 0.17])

    def G(x):
        return ker.full(np.atleast_2d(x), np.zeros((1, 2)))[0][0, 0]

    res = []
    for h in (1e-2, 5e-3):
        e = np.eye(2) * h
        d2 = {(a, a): (G(x0 + e[a]) - 2 * G(x0) + G(x0 - e[a])) / h ** 2 for a in range(2)}
        d2[0, 1] = (G(x0 + e[0] + e[1]) - G(x0 + e[0] - e[1]) - G(x0 - e[0] + e[1]) + G(x0 - e[0] - e[1])) / (4 * h * h)
        d2[1, 0] = d2[0, 1]
        L = P.mu * (d2[0, 0] + d2[1, 1]) + (P.lam + P.mu) * np.stack([d2[i, 0][0] + d2[i, 1][1] for i in range(2)])
        res.append(np.abs(L + P.rho * 4.0 * G(x0)).max())
    assert res[1] < res[0] / 3.0


def test_large_mu_series_consistency():
    mu = 1e4
    big = P.scaled(mu)
    d = np.array([0.2, 0.1])
    a = (np.pi, np.pi)
    w = 3.0
    G = qp_green(d, a, w, big)
    S = sum(mu ** -l * qp_green_series_term(l, d, a, w, big) for l in (1, 2, 3))
    assert np.abs(G - S).max() <= 1e-6


def test_series_partial_sums_converge_geometrically():
    mu = 100.0
    big = P.scaled(mu)
    d = np.array([0.2, 0.1])
    a = (np.pi, np.pi)
    G = qp_green(d, a, 3.0, big)
    errs, S = [], 0.0
    for l in range(1, 5):
        S = S + mu ** -l * qp_green_series_term(l, d, a, 3.0, big)
        errs.append(np.abs(G - S).max())
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    assert np.all(ratios < 0.2)


def test_series_term_omega_dependence():
    d = np.array([0.15, -0.2])
    a = (np.pi, 0.5)
    t1a = qp_green_series_term(1, d, a, 1.0, P)
    t1b = qp_green_series_term(1, d, a, 3.0, P)
    assert np.array_equal(t1a, t1b)
    t2a = qp_green_series_term(2, d, a, 1.0, P)
    t2b = qp_green_series_term(2, d, a, 2.0, P)
    assert np.allclose(t2b, 4 * t2a, rtol=1e-13)


def test_static_is_first_series_term():
    d = np.array([0.15, -0.2])
    a = (0.4, 0.5)
    q = LameParams(2.0, 3.0)
    assert np.allclose(qp_green_static(d, a, q), qp_green_series_term(1, d, a, 0.0, q) / 3.0)
    with pytest.raises(ValueError):
        qp_green_static(d, (0.0, 0.0), q)


def test_periodic_static_is_periodic_and_regular_part_near_kelvin():
    d = np.array([0.21, 0.33])
    g = periodic_green_static(d, P)
    assert np.allclose(periodic_green_static(d + np.array([1.0, 0.0]), P), g, atol=1e-9)
    # the singular part is the Kelvin matrix: the difference is smooth near 0
    u = np.array([0.6, 0.8])
    vals = [periodic_green_static(r * u, P, LatticeSumConfig(M=200)) - kelvin_matrix(r * u, P) for r in (1e-2, 5e-3)]
    assert np.abs(vals[0] - vals[1]).max() < 1e-2


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_tau_l_bounds(l):
    t = tau_l(l, P)
    assert 0 < t < 1
    assert tau_l(l + 1, P) > t


def test_resonance_guard():
    # k_T = |alpha| exactly for the n = 0 mode
    a = (1.0, 0.0)
    with pytest.raises(ResonanceError) as exc:
        check_resonance(a, 1.0, P)
    assert exc.value.n == (0, 0)
    with pytest.raises(ResonanceError):
        qp_green(np.array([0.1, 0.1]), a, 1.0, P)
    # the perturbed frequency is accepted
    qp_green(np.array([0.1, 0.1]), a, 1.0 + 1e-6j, P)


def test_regular_part_bounded_and_consistent():
    d = np.array([0.1, 0.05])
    G, tail = qp_green(d, ALPHA, 3.0, P, return_tail=True)
    assert np.abs(qp_green_regular(d, ALPHA, 3.0, P) + fundamental_matrix(d, 3.0, P) - G).max() <= tail
    u = np.array([0.6, 0.8])
    vals = [qp_green_regular(r * u, ALPHA, 3.0, P) for r in (1e-2, 1e-3, 1e-4)]
    assert np.abs(vals[1] - vals[2]).max() < 1e-3
    tr = [qp_traction_regular(r * u, u, ALPHA, 3.0, P) for r in (1e-2, 1e-3, 1e-4)]
    assert np.abs(tr[1] - tr[2]).max() < 1e-2


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 6.2), st.floats(0.05, 6.2), st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_quasi_periodicity_ewald(a1, a2, dx, dy):
    d = np.array([dx, dy])
    if np.linalg.norm(d) < 0.1:
        return
    ker = LatticeKernel.build("helmholtz", (a1, a2), 2.2, P)
    pts = np.stack([d, d + [1.0, 0.0], d + [0.0, 1.0]])
    G, _ = ker.full(pts, np.zeros((1, 2)))
    scale = np.abs(G[0, 0]).max()
    assert np.abs(G[1, 0] - np.exp(1j * a1) * G[0, 0]).max() <= 1e-9 * scale
    assert np.abs(G[2, 0] - np.exp(1j * a2) * G[0, 0]).max() <= 1e-9 * scale


def test_config_validation():
    with pytest.raises(ValueError):
        LatticeSumConfig(M=4)
    with pytest.raises(ValueError):
        LatticeSumConfig(eps_res=0.0)
