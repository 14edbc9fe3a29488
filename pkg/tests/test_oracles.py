"""The disk reference spectrum, cross-checked with mpmath."""
import mpmath as mp
import numpy as np
import pytest

from phonon_bem.oracles import disk_dirichlet_determinant, disk_dirichlet_eigenvalues, expanded

# first values for r = 0.3 and unit Lame constants and density (order n in brackets)
TABLE = [
    (11.2161315587, 1),
    (12.7723532340, 0),
    (17.4078848204, 2),
    (17.9304432330, 1),
    (22.1223647335, 0),
    (22.5493550637, 3),
    (23.1198725905, 2),
    (23.3852888994, 0),
]


def mp_det(n, w, R=0.3, lam=1.0, mu=1.0, rho=1.0):
    a = w * R * mp.sqrt(rho / (lam + 2 * mu))
    b = w * R * mp.sqrt(rho / mu)
    return n * n * mp.besselj(n, a) * mp.besselj(n, b) - a * b * mp.besselj(n, a, 1) * mp.besselj(n, b, 1)


def test_table_reproduced():
    got = disk_dirichlet_eigenvalues(0.3, 1.0, 1.0, omega_max=23.6)
    assert [(round(w, 10), n) for w, _, n in got] == [(w, n) for w, n in TABLE]
    assert [m for _, m, _ in got] == [1 if n == 0 else 2 for _, n in TABLE]


@pytest.mark.parametrize("w,n", TABLE)
def test_roots_against_mpmath(w, n):
    with mp.workdps(30):
        root = mp.findroot(lambda x: mp_det(n, x), w)
    assert abs(float(root) - w) < 1e-9


def test_axisymmetric_roots_are_bessel_zeros():
    # n = 0: the determinant is J1(a) J1(b), so roots are j_{1,k} c / R for both speeds
    with mp.workdps(20):
        j11 = float(mp.besseljzero(1, 1))
    assert j11 / 0.3 == pytest.approx(TABLE[1][0], rel=1e-10)
    assert j11 * np.sqrt(3) / 0.3 == pytest.approx(TABLE[4][0], rel=1e-10)


def test_scaling_with_radius_and_speed():
    base = [w for w, _, _ in disk_dirichlet_eigenvalues(0.3, 1.0, 1.0, omega_max=20)]
    # doubling all moduli scales frequencies by sqrt 2; halving R doubles them
    scaled = [w for w, _, _ in disk_dirichlet_eigenvalues(0.3, 2.0, 2.0, omega_max=20 * np.sqrt(2))]
    assert np.allclose(scaled, np.sqrt(2) * np.array(base), rtol=1e-10)
    small = [w for w, _, _ in disk_dirichlet_eigenvalues(0.15, 1.0, 1.0, omega_max=40)]
    assert np.allclose(small, 2 * np.array(base), rtol=1e-10)


def test_determinant_matches_mpmath_pointwise():
    for n in (0, 1, 3):
        for w in (5.0, 13.3, 21.0):
            assert disk_dirichlet_determinant(n, w, 0.3, 1.0, 1.0) == pytest.approx(float(mp_det(n, w)), rel=1e-10, abs=1e-13)


def test_expanded():
    assert expanded([(1.0, 1, 0), (2.0, 2, 1)]) == [1.0, 2.0, 2.0]
    assert expanded([(1.0, 1, 0), (2.0, 2, 1)], 2) == [1.0, 2.0]
