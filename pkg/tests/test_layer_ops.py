"""Nystrom layer operators, jump relations and the block operator families."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_bem.checks import constant_density_defect, jump_residual
from phonon_bem.geometry import Circle, Ellipse, area_of, sample_mesh
from phonon_bem.kernels import LameParams
from phonon_bem.layer_ops import (
    assemble_A,
    assemble_A0,
    assemble_A0_periodic,
    assemble_A_tau,
    assemble_Al,
    assemble_kstar,
    assemble_single_layer,
    double_layer_from_kstar,
    hilbert_weights,
    integral_row,
    kress_weights,
    transition_poles,
    trig_upsample,
)

INC = LameParams(1.0, 1.0)
UNIT = LameParams(1.0, 1.0)
DISK = Circle((0.5, 0.5), 0.3)
ELL = Ellipse((0.45, 0.5), 0.3, 0.2, 0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(-15, 15))
def test_kress_weights_on_fourier_modes(m):
    # int ln(4 sin^2((t-s)/2)) e^{ims} ds = -2 pi/|m| e^{imt}, and 0 for m = 0
    N = 32
    t = 2 * np.pi * np.arange(N) / N
    f = np.exp(1j * m * t)
    ref = 0 * f if m == 0 else -2 * np.pi / abs(m) * f
    assert np.abs(kress_weights(N) @ f - ref).max() < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(-15, 15))
def test_hilbert_weights_on_fourier_modes(m):
    N = 32
    t = 2 * np.pi * np.arange(N) / N
    f = np.exp(1j * m * t)
    assert np.abs(hilbert_weights(N) @ f - 1j * np.sign(m) * f).max() < 1e-12


def test_trig_upsample_exact_for_trig_polynomials():
    N = 16
    t = 2 * np.pi * np.arange(N) / N
    f = lambda s: np.cos(3 * s) + 0.5 * np.sin(5 * s) + 0.2
    fine = 2 * np.pi * np.arange(4 * N) / (4 * N)
    assert np.abs(trig_upsample(f(t), 4) - f(fine)).max() < 1e-13


def test_integral_row_and_double_layer():
    m = sample_mesh(ELL, 48)
    R = integral_row(m)
    v = np.tile([1.0, 0.0], m.N)
    assert R @ v == pytest.approx([m.perimeter, 0.0])
    Ks = assemble_kstar(m, "free", 2.0, INC).matrix
    K = double_layer_from_kstar(Ks, m)
    # bilinear duality (K phi, psi)_ds = (phi, K* psi)_ds
    rng = np.random.default_rng(0)
    phi, psi = rng.standard_normal((2, 2 * m.N))
    w = np.repeat(m.weights, 2)
    assert np.sum(w * (K @ phi) * psi) == pytest.approx(np.sum(w * phi * (Ks @ psi)), rel=1e-12)


@pytest.mark.parametrize("curve", [DISK, ELL], ids=["disk", "ellipse"])
def test_constant_density_identity(curve):
    assert constant_density_defect(sample_mesh(curve, 64), LameParams(0.7, 2.0)) <= 1e-8


def test_static_double_layer_of_constants_on_free_kernel():
    # Kelvin double layer of a constant: (1/2 + K) c = c
    m = sample_mesh(ELL, 64)
    K = double_layer_from_kstar(assemble_kstar(m, "free", 0.0, INC).matrix, m)
    c = np.tile([0.4, -1.0], m.N)
    assert np.abs(0.5 * c + K @ c - c).max() < 1e-10


@pytest.mark.parametrize("kernel,omega,params,alpha", [
    ("free", 5.0, INC, None),
    ("qp", 3.0, UNIT, (1.0, 2.0)),
])
def test_jump_relations(kernel, omega, params, alpha):
    assert jump_residual(sample_mesh(DISK, 64), kernel, omega, params, alpha) <= 1e-5


def test_single_layer_spectral_self_convergence():
    # S phi for a smooth density: N = 32 and N = 64 agree on shared nodes
    out = []
    for N in (32, 64, 128):
        m = sample_mesh(ELL, N)
        phi = np.stack([np.cos(m.params), np.sin(2 * m.params)], 1).ravel()
        out.append((assemble_single_layer(m, "free", 4.0, INC).matrix @ phi).reshape(N, 2))
    e1 = np.abs(out[0] - out[1][::2]).max()
    e2 = np.abs(out[1] - out[2][::2]).max()
    assert e2 < 1e-9 and e2 < e1


def test_large_mu_expansion_residuals_decay():
    m = sample_mesh(DISK, 32)
    alpha, om = (np.pi, np.pi), 11.0
    A0 = assemble_A0(alpha, om, UNIT, INC, m).matrix
    Al = [assemble_Al(l, alpha, om, UNIT, m).matrix for l in (1, 2, 3)]
    for mu in (1e2, 1e3):
        R = assemble_A(alpha, om, UNIT.scaled(mu), INC, m).matrix - A0
        res = [np.linalg.norm(R)]
        for l in range(3):
            R = R - Al[l] / mu ** (l + 1)
            res.append(np.linalg.norm(R))
        # each added term gains roughly a factor mu
        assert all(res[k + 1] < res[k] * 10 / mu for k in range(3))


def test_periodic_expansion_residuals_decay():
    m = sample_mesh(DISK, 32)
    om = 11.0
    mu = 1e3
    R = assemble_A((0.0, 0.0), om, UNIT.scaled(mu), INC, m).matrix - assemble_A0_periodic(om, UNIT, INC, m).matrix
    res = [np.linalg.norm(R)]
    for l in (1, 2):
        R = R - assemble_Al(l, (0.0, 0.0), om, UNIT, m).matrix / mu ** l
        res.append(np.linalg.norm(R))
    assert res[2] < res[1] < res[0]


class TestTransition:
    m = sample_mesh(DISK, 32)

    def test_small_tau_is_periodic_limit(self):
        A0 = assemble_A0_periodic(9.0, UNIT, INC, self.m).matrix
        At = assemble_A_tau(1e-10, (1.0, 0.0), 9.0, UNIT, INC, self.m).matrix
        assert np.abs(At - A0).max() < 1e-9 * np.abs(A0).max()

    def test_large_tau_kills_coupling(self):
        norms = [np.abs(assemble_A_tau(t, (0.6, 0.8), 9.0, UNIT, INC, self.m).block(0, 1)).max() for t in (1e4, 1e6)]
        assert norms[1] < norms[0] / 50

    def test_poles(self):
        p = LameParams(1.0, 1.0)
        lo, hi = transition_poles(9.0, p)
        assert lo == pytest.approx(3.0) and hi == pytest.approx(3.0 * np.sqrt(3.0))
        # lambda = 0 gives the second pole at 2 tau
        assert transition_poles(8.0, LameParams(0.0, 1.0))[1] == pytest.approx(4.0)
        with pytest.raises(ZeroDivisionError):
            assemble_A_tau(9.0, (1.0, 0.0), 3.0, p, INC, self.m)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            assemble_A_tau(0.0, (1.0, 0.0), 3.0, UNIT, INC, self.m)


def test_block_layout():
    m = sample_mesh(DISK, 16)
    A = assemble_A((1.0, 0.5), 4.0, UNIT.scaled(10.0), INC, m)
    S_in = assemble_single_layer(m, "free", 4.0, INC).matrix
    assert A.matrix.shape == (4 * m.N, 4 * m.N)
    assert np.array_equal(A.block(0, 0), S_in)
    with pytest.raises(ValueError):
        assemble_A0((0.0, 0.0), 4.0, UNIT, INC, m)
    with pytest.raises(ValueError):
        assemble_Al(0, (1.0, 0.5), 4.0, UNIT, m)


def test_area_fraction_matches_constant_density():
    assert 1 - area_of(DISK) == pytest.approx(1 - np.pi * 0.09, rel=1e-14)
