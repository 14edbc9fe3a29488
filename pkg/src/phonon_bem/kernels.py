"""Free-space Lame kernels: Kelvin (static) and Kupradze (time-harmonic) matrices
and their traction (conormal derivative) kernels.

Both matrices are written as  G = psi(r) I - chi(r) xhat xhat^T  with xhat = x/|x|.
For the dynamic case psi and chi are combinations of H0, H1, H2 at k_T r and
k_L r; the 1/(kr)^n Laurent parts that cancel between the two waves are removed
analytically (H1r = H1 + 2i/(pi z), H2r = H2 + 4i/(pi z^2)) so that small k r
does not cost precision.
"""
from dataclasses import dataclass

import numpy as np

from .special import EULER_GAMMA, bessel_j01, bessel_jy01


@dataclass(frozen=True)
class LameParams:
    """Lame constants and mass density of one phase."""

    lam: float
    mu: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not 3 * self.lam + 2 * self.mu > 0:
            raise ValueError("admissibility requires 3*lambda + 2*mu > 0")
        if not self.lam + 2 * self.mu > 0:
            raise ValueError("lambda + 2*mu must be positive for a real c_L")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @property
    def c_T(self):
        return np.sqrt(self.mu / self.rho)

    @property
    def c_L(self):
        return np.sqrt((self.lam + 2 * self.mu) / self.rho)

    def k_T(self, omega):
        return omega / self.c_T

    def k_L(self, omega):
        return omega / self.c_L

    def scaled(self, mu, keep_ratio=True):
        """Same phase with shear modulus ``mu``; lambda/mu is kept by default."""
        lam = self.lam * mu / self.mu if keep_ratio else self.lam
        return LameParams(lam, mu, self.rho)


@dataclass(frozen=True)
class KelvinConstants:
    gamma1: float
    gamma2: float


def kelvin_constants(params):
    e_t = 1.0 / params.mu
    e_l = 1.0 / (params.lam + 2 * params.mu)
    return KelvinConstants(0.5 * (e_t + e_l), 0.5 * (e_t - e_l))


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r == 0):
        raise ValueError("kernel evaluated at x = 0")
    return x, r


def _hankel_reg(z):
    """H0, H1, H1r, H2r at z."""
    j0, j1, y0, y1r = bessel_jy01(z, drop_pole=True)
    h0 = j0 + 1j * y0
    h1r = j1 + 1j * y1r
    h1 = h1r - 2j / (np.pi * z)
    h2r = 2 * h1r / z - h0
    return h0, h1, h1r, h2r


def _log_bessel(z):
    """(2i/pi) J_n for n = 0..2; the log-coefficient counterparts of H_n."""
    j0, j1 = bessel_j01(z)
    j2 = np.where(z == 0, 0.0, 2 * j1 / np.where(z == 0, 1.0, z) - j0)
    f = 2j / np.pi
    return f * j0, f * j1, f * j1, f * j2


def radial_dynamic(r, omega, params, log_part=False):
    """psi, psi', chi, chi' of the Kupradze matrix.

    With ``log_part`` the coefficient functions of ln r are returned instead
    (every Hankel value replaced by (2i/pi) J_n)."""
    e_t = 1.0 / params.mu
    e_l = 1.0 / (params.lam + 2 * params.mu)
    k_t = complex(params.k_T(omega))
    k_l = complex(params.k_L(omega))
    z_t = k_t * r
    z_l = k_l * r
    if log_part:
        h0t, h1t, h1rt, h2rt = _log_bessel(z_t)
        h0l, h1l, h1rl, h2rl = _log_bessel(z_l)
        # J1/z and J2/z are regular; guard the z = 0 diagonal
        zt = np.where(z_t == 0, 1.0, z_t)
        zl = np.where(z_l == 0, 1.0, z_l)
        q1t = np.where(z_t == 0, 1j / np.pi, h1rt / zt)
        q1l = np.where(z_l == 0, 1j / np.pi, h1rl / zl)
        q2t = np.where(z_t == 0, 0.0, h2rt / zt)
        q2l = np.where(z_l == 0, 0.0, h2rl / zl)
    else:
        h0t, h1t, h1rt, h2rt = _hankel_reg(z_t)
        h0l, h1l, h1rl, h2rl = _hankel_reg(z_l)
        q1t, q1l = h1rt / z_t, h1rl / z_l
        q2t, q2l = h2rt / z_t, h2rl / z_l
    c = -0.25j
    psi = c * (e_t * h0t + e_l * q1l - e_t * q1t)
    chi = c * (e_l * h2rl - e_t * h2rt)
    dpsi = c * (-e_t * k_t * h1t - e_l * k_l * q2l + e_t * k_t * q2t)
    dchi = c * (e_l * k_l * (h1l - 2 * q2l) - e_t * k_t * (h1t - 2 * q2t))
    return psi, dpsi, chi, dchi


def radial_static(r, params):
    """psi, psi', chi, chi' of the Kelvin matrix."""
    kc = kelvin_constants(params)
    psi = kc.gamma1 / (2 * np.pi) * np.log(r)
    dpsi = kc.gamma1 / (2 * np.pi) / r
    chi = np.full_like(r, kc.gamma2 / (2 * np.pi))
    return psi, dpsi, chi, np.zeros_like(r)


def dynamic_diagonal(omega, params):
    """Limits at x -> 0 of (psi - (gamma1/2pi) ln r) and of chi."""
    e_t = 1.0 / params.mu
    e_l = 1.0 / (params.lam + 2 * params.mu)
    ln_t = np.log(complex(params.k_T(omega)) / 2) + EULER_GAMMA
    ln_l = np.log(complex(params.k_L(omega)) / 2) + EULER_GAMMA
    psi0 = -0.125j * (e_t + e_l) + (e_t - e_l) / (8 * np.pi) + (e_t * ln_t + e_l * ln_l) / (4 * np.pi)
    chi0 = (e_t - e_l) / (4 * np.pi)
    return psi0, chi0


def matrix_from_radial(xhat, psi, chi):
    out = -chi[..., None, None] * xhat[..., :, None] * xhat[..., None, :]
    out[..., 0, 0] += psi
    out[..., 1, 1] += psi
    return out


def traction_from_radial(xhat, normal, r, dpsi, chi, dchi, params):
    """Conormal derivative (target normal) of each column of psi I - chi xhat xhat^T.

    Entry [i, k] is component i of the traction of column k."""
    lam, mu = params.lam, params.mu
    n = np.broadcast_to(normal, xhat.shape)
    c = np.sum(xhat * n, axis=-1)
    cr = chi / r
    xi = xhat[..., :, None]
    xk = xhat[..., None, :]
    ni = n[..., :, None]
    nk = n[..., None, :]
    eye = np.eye(2)
    e = lambda a: a[..., None, None]
    t = lam * e(dpsi - dchi - cr) * xk * ni
    t = t + mu * (
        e(dpsi) * (e(c) * eye + xi * nk)
        - 2 * e(dchi * c) * xi * xk
        - e(cr) * (2 * (ni - xi * e(c)) * xk + xi * (nk - e(c) * xk) + e(c) * (eye - xi * xk))
    )
    return t


def kelvin_matrix(x, params):
    """Static fundamental solution (gamma1/2pi) ln|x| I - (gamma2/2pi) x x^T/|x|^2."""
    x, r = _as_points(x)
    psi, _, chi, _ = radial_static(r, params)
    return matrix_from_radial(x / r[..., None], psi, chi)


def fundamental_matrix(x, omega, params):
    """Time-harmonic fundamental solution of L + rho omega^2 (outgoing)."""
    if omega == 0:
        raise ValueError("omega = 0: use kelvin_matrix")
    x, r = _as_points(x)
    psi, _, chi, _ = radial_dynamic(r, omega, params)
    return matrix_from_radial(x / r[..., None], psi, chi)


def traction_kernel(x, normal, omega, params):
    """Traction of the fundamental matrix at x with respect to ``normal``.

    omega == 0 selects the Kelvin kernel."""
    x, r = _as_points(x)
    if omega == 0:
        _, dpsi, chi, dchi = radial_static(r, params)
    else:
        _, dpsi, chi, dchi = radial_dynamic(r, omega, params)
    normal = np.asarray(normal, dtype=float)
    return traction_from_radial(x / r[..., None], normal, r, dpsi, chi, dchi, params)


def static_traction_closed_form(x, normal, params):
    """Kelvin traction written out directly (independent of the radial plumbing)."""
    x, r = _as_points(x)
    xh = x / r[..., None]
    n = np.broadcast_to(np.asarray(normal, float), x.shape)
    c = np.sum(xh * n, axis=-1)[..., None, None]
    m = params.lam + 2 * params.mu
    xi, xk = xh[..., :, None], xh[..., None, :]
    ni, nk = n[..., :, None], n[..., None, :]
    body = (params.mu / m) * (xi * nk - xk * ni) + c * ((params.mu / m) * np.eye(2) + 2 * (params.lam + params.mu) / m * xi * xk)
    return body / (2 * np.pi * r[..., None, None])
