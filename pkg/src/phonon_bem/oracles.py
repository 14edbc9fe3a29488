"""Separation-of-variables reference values for the disk.

Independent of the boundary-integral machinery: uses scipy's Bessel functions
and bracketing root finders only.
"""
import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp


def disk_dirichlet_determinant(n, omega, radius, lam, mu, rho=1.0):
    """n^2 J_n(a) J_n(b) - a b J_n'(a) J_n'(b), with a = k_L R and b = k_T R."""
    a = omega * radius * np.sqrt(rho / (lam + 2 * mu))
    b = omega * radius * np.sqrt(rho / mu)
    return n * n * jv(n, a) * jv(n, b) - a * b * jvp(n, a) * jvp(n, b)


def disk_dirichlet_eigenvalues(radius, lam, mu, rho=1.0, omega_max=30.0, n_max=None, grid=4000):
    """Sorted (omega, multiplicity, n) triples below omega_max; orders n >= 1 are double."""
    if n_max is None:
        n_max = int(omega_max * radius / np.sqrt(mu / rho)) + 4
    w = np.linspace(1e-3, omega_max, grid)
    out = []
    for n in range(n_max + 1):
        f = disk_dirichlet_determinant(n, w, radius, lam, mu, rho)
        for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
            r = brentq(lambda x: disk_dirichlet_determinant(n, x, radius, lam, mu, rho), w[i], w[i + 1], xtol=1e-14)
            out.append((r, 1 if n == 0 else 2, n))
    return sorted(out)


def expanded(triples, count=None):
    vals = []
    for w, m, _ in triples:
        vals.extend([w] * m)
    return vals if count is None else vals[:count]
