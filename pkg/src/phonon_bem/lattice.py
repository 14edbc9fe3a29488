"""Quasi-periodic Green's tensors of the Lame system on the unit square lattice.

Two evaluation paths are provided.

* Plain truncated reciprocal-lattice sums (``qp_green`` and friends).  These are
  the reference definitions; they converge only like 1/M and are used as
  oracles and for pointwise checks.
* Ewald-split evaluation (``LatticeKernel``) for Nystrom assembly.  Every
  tensor is written as  G = ca * A * I + cb * grad grad B  with scalar lattice
  functions A, B, and each scalar is split into a Gaussian-damped spectral sum
  plus a spatial image sum in exponential integrals E_p.  Subtracting the
  free-space kernel from the m = 0 image gives a smooth regular part.

The scalar families are
  g_k   (Delta + k^2) g = sum_m delta(x - m) e^{i alpha.m}, symbol 1/(k^2 - Q)
  b     (g_{k_L} - g_{k_T}) / (rho w^2), evaluated without the 1/w^2 cancellation
  P_l   symbol 1/Q^l (n = 0 dropped when alpha = 0)
with q = 2 pi n + alpha and Q = |q|^2.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.special import expn

from .kernels import LameParams, matrix_from_radial, radial_dynamic, traction_from_radial
from .special import EULER_GAMMA


@dataclass(frozen=True)
class LatticeSumConfig:
    """Truncation and resonance settings.

    M           plain sums run over |n|_inf <= M
    tol         target tolerance used for the Ewald series cut-offs
    eps_res     resonance guard factor: |k^2 - Q| > eps_res (1 + |k|^2)
    eta         Ewald splitting parameter
    modes       Ewald spectral sum over |n|_inf <= modes
    """

    M: int = 40
    tol: float = 1e-14
    eps_res: float = 1e-8
    eta: float = 6.0
    modes: int = 12

    def __post_init__(self):
        if self.M < 8:
            raise ValueError(f"M must be at least 8, got {self.M}")
        if not self.eps_res > 0:
            raise ValueError("eps_res must be positive")
        if self.modes < 4 or self.eta <= 0:
            raise ValueError("invalid Ewald settings")


DEFAULT_CFG = LatticeSumConfig()


class ResonanceError(ArithmeticError):
    """k^2 hits |2 pi n + alpha|^2 within the guard; perturb omega and retry."""

    def __init__(self, n, wave, gap):
        super().__init__(f"resonant lattice vector n={tuple(int(v) for v in n)} for the {wave} wave (|k^2 - Q| = {gap:.3e})")
        self.n = tuple(int(v) for v in n)
        self.wave = wave


def tau_l(l, params):
    """1 - (c_T/c_L)^(2l)."""
    if l < 1:
        raise ValueError("l must be >= 1")
    return 1.0 - (params.mu / (params.lam + 2 * params.mu)) ** l


def _check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (2,):
        raise ValueError("alpha must be a 2-vector")
    return alpha


def _modes(alpha, M, drop_zero=False):
    r = np.arange(-M, M + 1)
    n = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2)
    if drop_zero:
        n = n[np.any(n != 0, axis=1)]
    q = 2 * np.pi * n + alpha
    return n, q


def _wavenumbers_sq(omega, params):
    w2 = params.rho * complex(omega) ** 2
    return w2 / (params.lam + 2 * params.mu), w2 / params.mu


def check_resonance(alpha, omega, params, cfg=DEFAULT_CFG):
    alpha = _check_alpha(alpha)
    n, q = _modes(alpha, cfg.M)
    Q = np.sum(q * q, axis=1)
    kl2, kt2 = _wavenumbers_sq(omega, params)
    for wave, k2 in (("transverse", kt2), ("longitudinal", kl2)):
        gap = np.abs(k2 - Q)
        j = np.argmin(gap)
        if gap[j] <= cfg.eps_res * (1 + abs(k2)):
            raise ResonanceError(n[j], wave, gap[j])


def _is_zero_alpha(alpha):
    return bool(np.all(np.asarray(alpha) == 0))


# ---------------------------------------------------------------- tensors


def _radial_derivs(d, f1, f2, f3):
    """grad, hess, third of f(|d|^2) given f', f'', f''' (broadcast over leading axes)."""
    eye = np.eye(2)
    e = lambda a: a[..., None]
    grad = 2 * d * e(f1)
    dd = d[..., :, None] * d[..., None, :]
    hess = 2 * eye * e(e(f1)) + 4 * dd * e(e(f2))
    sym = (
        eye[:, :, None] * d[..., None, None, :]
        + eye[:, None, :] * d[..., None, :, None]
        + eye[None, :, :] * d[..., :, None, None]
    )
    third = 4 * sym * e(e(e(f2))) + 8 * dd[..., None] * d[..., None, None, :] * e(e(e(f3)))
    return grad, hess, third


def compose(ca, A, cb, B, normals=None, lam=None, mu=None):
    """G = ca A I + cb grad grad B, and its traction for unit ``normals`` at the target.

    A needs 'val' and 'grad'; B needs 'hess' and 'third'.  Traction entry [i, k]
    is component i for column k."""
    eye = np.eye(2)
    G = ca * A["val"][..., None, None] * eye + cb * B["hess"]
    if normals is None:
        return G, None
    n = np.broadcast_to(normals, A["grad"].shape)
    a = ca * A["grad"]
    third = cb * B["third"]
    div = a + np.einsum("...mmk->...k", third)
    an = np.sum(a * n, axis=-1)
    T = lam * n[..., :, None] * div[..., None, :]
    T = T + mu * (an[..., None, None] * eye + a[..., :, None] * n[..., None, :] + 2 * np.einsum("...ijk,...j->...ik", third, n))
    return G, T


# ---------------------------------------------------------------- plain sums


def _plain_scalar(d, q, sym):
    ph = np.exp(1j * (d @ q.T)) * sym
    return {
        "val": np.sum(ph, axis=-1),
        "grad": 1j * ph @ q,
        "hess": -np.einsum("...m,mi,mj->...ij", ph, q, q),
        "third": -1j * np.einsum("...m,mi,mj,mk->...ijk", ph, q, q, q),
    }


def _plain_symbols(kind, q, alpha, omega, params, l=1):
    Q = np.sum(q * q, axis=1)
    if kind == "helmholtz":
        kl2, kt2 = _wavenumbers_sq(omega, params)
        e_t, e_l = 1 / params.mu, 1 / (params.lam + 2 * params.mu)
        At = 1 / (Q - kt2)
        Al = 1 / (Q - kl2)
        return 1 / params.mu, -At, -1.0, -(e_l - e_t) * Al * At
    w = (params.rho * complex(omega) ** 2) ** (l - 1)
    return -w, Q ** (-float(l)), -w * tau_l(l, params), Q ** (-float(l + 1))


def _plain(kind, d, alpha, omega, params, cfg, l=1, normal=None, M=None):
    alpha = _check_alpha(alpha)
    d = np.asarray(d, dtype=float)
    drop = kind == "poly" and _is_zero_alpha(alpha)
    if kind == "helmholtz":
        check_resonance(alpha, omega, params, cfg)
    _, q = _modes(alpha, cfg.M if M is None else M, drop_zero=drop)
    ca, sa, cb, sb = _plain_symbols(kind, q, alpha, omega, params, l)
    A = _plain_scalar(d, q, sa)
    B = _plain_scalar(d, q, sb)
    G, T = compose(ca, A, cb, B, normal, params.lam, params.mu)
    return T if normal is not None else G


def _tail(plain, kind, d, alpha, omega, params, cfg, l, normal):
    ker = LatticeKernel.build(kind, alpha, omega, params, cfg, l=l)
    G, T = ker.full(np.atleast_2d(d), np.zeros((1, 2)), None if normal is None else np.atleast_2d(normal))
    ref = (T if normal is not None else G)[0, 0]
    return 2.0 * float(np.max(np.abs(plain - ref)))


def qp_green(d, alpha, omega, params, cfg=DEFAULT_CFG, return_tail=False):
    """Truncated reciprocal-lattice sum for G^{alpha,omega}(d).

    With ``return_tail`` also returns a tail estimate (twice the distance to
    the Ewald-converged value)."""
    if omega == 0:
        raise ValueError("omega = 0: use qp_green_static")
    G = _plain("helmholtz", d, alpha, omega, params, cfg)
    if return_tail:
        return G, _tail(G, "helmholtz", d, alpha, omega, params, cfg, 1, None)
    return G


def qp_traction(d, normal, alpha, omega, params, cfg=DEFAULT_CFG):
    """Traction of qp_green with respect to ``normal`` at the target, termwise."""
    return _plain("helmholtz", d, alpha, omega, params, cfg, normal=np.asarray(normal, float))


def qp_green_regular(d, alpha, omega, params, cfg=DEFAULT_CFG):
    """G^{alpha,omega}(d) - Gamma^omega(d), finite at d = 0 (near-diagonal use, |d| < 0.5)."""
    d = np.asarray(d, dtype=float)
    if np.linalg.norm(d) >= 0.5:
        raise ValueError("qp_green_regular is meant for |d| < 0.5")
    ker = LatticeKernel.build("helmholtz", alpha, omega, params, cfg)
    G, _ = ker.regular(d[None, :], np.zeros((1, 2)))
    return G[0, 0]


def qp_traction_regular(d, normal, alpha, omega, params, cfg=DEFAULT_CFG):
    """Traction counterpart of qp_green_regular (normal at the target)."""
    d = np.asarray(d, dtype=float)
    if np.linalg.norm(d) >= 0.5:
        raise ValueError("qp_traction_regular is meant for |d| < 0.5")
    ker = LatticeKernel.build("helmholtz", alpha, omega, params, cfg)
    _, T = ker.regular(d[None, :], np.zeros((1, 2)), np.asarray(normal, float)[None, :])
    return T[0, 0]


def qp_green_series_term(l, d, alpha, omega, params, cfg=DEFAULT_CFG, return_tail=False):
    """Coefficient of mu^{-l} of G^{alpha,omega} as mu -> inf with lambda/mu fixed.

    (rho w^2)^{l-1} sum_n e^{iq.d} (-I/Q^l + tau_l q q^T / Q^{l+1}); for alpha = 0
    the n = 0 mode is left out (its I/(rho w^2) contribution is separate)."""
    if int(l) != l or l < 1:
        raise ValueError("l must be a positive integer")
    unit = params.scaled(1.0)
    G = _plain("poly", d, alpha, omega, unit, cfg, l=int(l))
    if return_tail:
        return G, _tail(G, "poly", d, alpha, omega, unit, cfg, int(l), None)
    return G


def qp_series_traction(l, d, normal, alpha, omega, params, cfg=DEFAULT_CFG):
    """Traction (Lame constants scaled to mu = 1) of qp_green_series_term."""
    return _plain("poly", d, alpha, omega, params.scaled(1.0), cfg, l=int(l), normal=np.asarray(normal, float))


def qp_green_static(d, alpha, params, cfg=DEFAULT_CFG, return_tail=False):
    """G^{alpha,0} for alpha != 0."""
    if _is_zero_alpha(alpha):
        raise ValueError("alpha = 0: use periodic_green_static")
    out = qp_green_series_term(1, d, alpha, 0.0, params, cfg, return_tail)
    if return_tail:
        return out[0] / params.mu, out[1] / params.mu
    return out / params.mu


def periodic_green_static(d, params, cfg=DEFAULT_CFG, return_tail=False):
    """G^{0,0}: the alpha = 0 static sum without the n = 0 mode."""
    out = qp_green_series_term(1, d, (0.0, 0.0), 0.0, params, cfg, return_tail)
    if return_tail:
        return out[0] / params.mu, out[1] / params.mu
    return out / params.mu


# ---------------------------------------------------------------- Ewald


def _expint(p, x):
    """E_p(x) for integer p >= -2 and x > 0."""
    if p >= 0:
        return expn(p, x)
    ex = np.exp(-x)
    if p == -1:
        return ex * (x + 1) / x ** 2
    if p == -2:
        return ex * (x * x + 2 * x + 2) / x ** 3
    raise ValueError("order below -2 not needed")


class _EwaldScalar:
    """One scalar lattice function: spectral symbol, spatial E_p series, m = 0 regular data."""

    def __init__(self, q, sym, spatial, const, eta, alpha, a0, a1):
        self.q = q
        self.sym = sym
        self.spatial = spatial  # list of (coef, p)
        self.const = const
        self.eta = eta
        self.alpha = alpha
        self.a0 = a0  # value of (m = 0 image - free part) at d = 0
        self.a1 = a1  # its coefficient of s = |d|^2

    def _spatial_derivs(self, s):
        e2 = self.eta ** 2
        x = e2 * s
        out = [np.zeros(s.shape, complex) for _ in range(4)]
        cache = {}
        for c, p in self.spatial:
            for nu in range(4):
                if p - nu not in cache:
                    cache[p - nu] = _expint(p - nu, x)
                out[nu] += c * (-e2) ** nu * cache[p - nu]
        return out

    def evaluate(self, x, y):
        """val, grad, hess, third on the pair grid x[:, None] - y[None, :].

        At coincident pairs the m = 0 image is replaced by its regular part."""
        d = x[:, None, :] - y[None, :, :]
        X = np.exp(1j * x @ self.q.T)
        Y = np.exp(1j * y @ self.q.T).conj()
        sq = self.sym
        qq = self.q
        val = (X * sq) @ Y.T + self.const
        grad = np.stack([(X * (1j * qq[:, a] * sq)) @ Y.T for a in range(2)], axis=-1)
        hess = np.empty(d.shape[:2] + (2, 2), complex)
        third = np.empty(d.shape[:2] + (2, 2, 2), complex)
        for a in range(2):
            for b in range(a, 2):
                h = (X * (-qq[:, a] * qq[:, b] * sq)) @ Y.T
                hess[..., a, b] = hess[..., b, a] = h
                for c in range(b, 2):
                    t = (X * (-1j * qq[:, a] * qq[:, b] * qq[:, c] * sq)) @ Y.T
                    for (i, j, k) in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                        third[..., i, j, k] = t
        # spatial images are taken around the nearest lattice point of each d,
        # so any separation (not only in-cell ones) sees its close images
        m0 = np.rint(d)
        zero = np.zeros(d.shape[:2], bool)
        zph = np.ones(d.shape[:2], complex)
        for m in ((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)):
            mm = m0 + np.asarray(m, float)
            dm = d - mm
            s = np.sum(dm * dm, axis=-1)
            ph = np.exp(1j * (mm @ self.alpha))
            mask = s * self.eta ** 2 < 60.0
            hit = s == 0
            zero |= hit
            zph[hit] = ph[hit]
            mask &= ~hit
            if not np.any(mask):
                continue
            f0, f1, f2, f3 = self._spatial_derivs(s[mask])
            g, h, t = _radial_derivs(dm[mask], f1, f2, f3)
            val[mask] += ph[mask] * f0
            grad[mask] += ph[mask][:, None] * g
            hess[mask] += ph[mask][:, None, None] * h
            third[mask] += ph[mask][:, None, None, None] * t
        if np.any(zero):
            val[zero] += zph[zero] * self.a0
            hess[zero] += (2 * self.a1 * zph[zero])[:, None, None] * np.eye(2)
        return {"val": val, "grad": grad, "hess": hess, "third": third}, zero


def _j_terms(kappa_abs, tol):
    j, term = 0, 1.0
    while term > tol or j < 3:
        j += 1
        term *= kappa_abs / j
    return j + 1


def helmholtz_scalar(alpha, k2, cfg):
    """Ewald data for g_k with wavenumber squared k2."""
    eta = cfg.eta
    n, q = _modes(alpha, cfg.modes)
    Q = np.sum(q * q, axis=1)
    gap = Q - k2
    if np.min(np.abs(gap)) <= cfg.eps_res * (1 + abs(k2)):
        j = np.argmin(np.abs(gap))
        raise ResonanceError(n[j], "k", abs(gap[j]))
    sym = -np.exp(-gap / (4 * eta ** 2)) / gap
    kappa = k2 / (4 * eta ** 2)
    J = _j_terms(abs(kappa), cfg.tol)
    spatial = [(-(kappa ** j) / factorial(j) / (4 * np.pi), j + 1) for j in range(J)]
    lk = np.log(np.sqrt(complex(k2)) / (2 * eta)) if k2 != 0 else 0.0
    s1 = sum(kappa ** j / (j * factorial(j)) for j in range(1, J))
    s2 = sum(kappa ** j / (factorial(j) * (j - 1)) for j in range(2, J))
    a0 = 0.25j - (EULER_GAMMA + 2 * lk + s1) / (4 * np.pi)
    a1 = -eta ** 2 / (4 * np.pi) + eta ** 2 / (4 * np.pi) * s2 + k2 / (16 * np.pi) * (2 * lk + EULER_GAMMA - 1) - 1j * k2 / 16
    return _EwaldScalar(q, sym, spatial, 0.0, eta, alpha, a0, a1)


def difference_scalar(alpha, omega, params, cfg):
    """Ewald data for b = (g_{k_L} - g_{k_T}) / (rho w^2)."""
    eta = cfg.eta
    E4 = 4 * eta ** 2
    w2 = params.rho * complex(omega) ** 2
    e_t, e_l = 1 / params.mu, 1 / (params.lam + 2 * params.mu)
    a, b = w2 * e_l, w2 * e_t
    n, q = _modes(alpha, cfg.modes)
    Q = np.sum(q * q, axis=1)
    for k2, wave in ((a, "longitudinal"), (b, "transverse")):
        g = np.abs(Q - k2)
        if np.min(g) <= cfg.eps_res * (1 + abs(k2)):
            raise ResonanceError(n[np.argmin(g)], wave, np.min(g))
    A = 1 / (Q - a)
    B = 1 / (Q - b)
    eb = np.exp((b - Q) / E4)
    delta = (a - b) / E4
    ratio = np.expm1(delta) / (a - b) if a != b else 1 / E4
    sym = (e_l - e_t) * (-eb * A * (B + ratio))
    kap = max(abs(a), abs(b)) / E4
    J = _j_terms(kap, cfg.tol)
    coef = lambda j: (e_l ** j - e_t ** j) * w2 ** (j - 1) / (E4 ** j * factorial(j))
    spatial = [(-coef(j) / (4 * np.pi), j + 1) for j in range(1, J)]
    lnl = np.log(np.sqrt(complex(a)) / (2 * eta)) if a != 0 else 0.0
    lnt = np.log(np.sqrt(complex(b)) / (2 * eta)) if b != 0 else 0.0
    s2 = sum(coef(j) / (j - 1) for j in range(2, J))
    a1 = (
        eta ** 2 / (4 * np.pi) * s2
        + (e_l * (2 * lnl + EULER_GAMMA - 1) - e_t * (2 * lnt + EULER_GAMMA - 1)) / (16 * np.pi)
        - 1j * (e_l - e_t) / 16
    )
    if w2 == 0:
        # static limit: free part is (e_L - e_T) s ln s / (16 pi) ... handled by poly kernels
        raise ValueError("difference scalar needs omega != 0")
    return _EwaldScalar(q, sym, spatial, 0.0, eta, alpha, np.nan, a1)


def _digamma_int(n):
    return -EULER_GAMMA + sum(1.0 / k for k in range(1, n))


def poly_free_coef(l):
    """F_l(s) = c_l s^(l-1) ln r, the free-space part of P_l."""
    return (-1) ** l / (2 * np.pi * 4 ** (l - 1) * factorial(l - 1) ** 2)


def poly_scalar(alpha, l, cfg):
    """Ewald data for P_l."""
    eta = cfg.eta
    E4 = 4 * eta ** 2
    drop = _is_zero_alpha(alpha)
    _, q = _modes(alpha, cfg.modes, drop_zero=drop)
    Q = np.sum(q * q, axis=1)
    x = Q / E4
    sym = np.exp(-x) * sum(x ** j / factorial(j) for j in range(l)) / Q ** l
    C = 1 / (4 * np.pi * factorial(l - 1) * E4 ** (l - 1))
    const = -(1 / E4) ** l / factorial(l) if drop else 0.0

    def ap(p):
        if p == l - 1:
            return (-1) ** (l - 1) * (_digamma_int(l) - 2 * np.log(eta)) / factorial(l - 1)
        return -((-1) ** p) / ((p - l + 1) * factorial(p))

    return _EwaldScalar(q, sym.astype(complex), [(C, l)], const, eta, alpha, C * ap(0), C * ap(1) * eta ** 2)


def _poly_free(d, l, log_only=False):
    """val, grad, hess, third of F_l at d != 0 (or of its ln r coefficient c_l s^(l-1))."""
    s = np.sum(d * d, axis=-1)
    c = poly_free_coef(l)
    p = l - 1
    if log_only:
        # c s^p; derivatives of a polynomial in s
        f = [c * s ** p]
        for nu in range(1, 4):
            co = np.prod([p - i for i in range(nu)]) if nu <= p else 0.0
            f.append(c * co * s ** max(p - nu, 0) if nu <= p else np.zeros_like(s))
    else:
        ls = np.log(s)
        h = 0.5 * c
        f = [
            h * s ** p * ls,
            h * (p * s ** (p - 1.0) * ls + s ** (p - 1.0)),
            h * (p * (p - 1) * s ** (p - 2.0) * ls + (2 * p - 1) * s ** (p - 2.0)),
            h * (p * (p - 1) * (p - 2) * s ** (p - 3.0) * ls + (3 * p * p - 6 * p + 2) * s ** (p - 3.0)),
        ]
    g, hh, t = _radial_derivs(d, f[1], f[2], f[3])
    return {"val": f[0], "grad": g, "hess": hh, "third": t}


class LatticeKernel:
    """Ewald evaluation of one quasi-periodic tensor G = ca A I + cb grad grad B.

    ``kind`` is 'helmholtz' for G^{alpha,omega} or 'poly' for the large-mu
    series term G_l (which with l = 1 and scale 1/mu is G^{alpha,0}).  The
    free part removed by ``regular`` is the Kupradze matrix for 'helmholtz',
    the Kelvin matrix for 'poly' with l = 1, and the polyharmonic
    -I F_l - tau_l grad grad F_{l+1} for l >= 2."""

    def __init__(self, kind, A, ca, B, cb, params, omega, l, scale, alpha):
        self.kind, self.A, self.ca, self.B, self.cb = kind, A, ca, B, cb
        self.params, self.omega, self.l, self.scale = params, omega, l, scale
        self.alpha = alpha

    @classmethod
    def build(cls, kind, alpha, omega, params, cfg=DEFAULT_CFG, l=1, scale=1.0):
        alpha = _check_alpha(alpha)
        if kind == "helmholtz":
            if omega == 0:
                raise ValueError("omega = 0 needs the static ('poly', l=1) kernel")
            kl2, kt2 = _wavenumbers_sq(omega, params)
            check_resonance(alpha, omega, params, cfg)
            A = helmholtz_scalar(alpha, kt2, cfg)
            B = difference_scalar(alpha, omega, params, cfg)
            return cls(kind, A, 1 / params.mu, B, -1.0, params, omega, 1, 1.0, alpha)
        if kind == "poly":
            w = (params.rho * complex(omega) ** 2) ** (l - 1)
            A = poly_scalar(alpha, l, cfg)
            B = poly_scalar(alpha, l + 1, cfg)
            t = tau_l(l, params)
            return cls(kind, A, -w * scale, B, -w * t * scale, params, omega, l, scale, alpha)
        raise ValueError(f"unknown kernel kind {kind!r}")

    def full(self, x, y, normals=None):
        """Full lattice tensor (and traction if ``normals`` at x are given); x != y + m."""
        A, zero = self.A.evaluate(x, y)
        if np.any(zero):
            raise ValueError("full lattice kernel evaluated at a lattice point")
        B, _ = self.B.evaluate(x, y)
        nrm = None if normals is None else normals[:, None, :]
        return compose(self.ca, A, self.cb, B, nrm, self.params.lam, self.params.mu)

    def free(self, d, normals=None):
        """Free-space part on a set of nonzero differences d (..., 2)."""
        p = self.params
        if self.kind == "helmholtz":
            r = np.hypot(d[..., 0], d[..., 1])
            xh = d / r[..., None]
            psi, dpsi, chi, dchi = radial_dynamic(r, self.omega, p)
            G = matrix_from_radial(xh, psi, chi)
            T = None if normals is None else traction_from_radial(xh, normals, r, dpsi, chi, dchi, p)
            return G, T
        A = _poly_free(d, self.l)
        B = _poly_free(d, self.l + 1)
        return compose(self.ca, A, self.cb, B, normals, p.lam, p.mu)

    def log_coefficient(self, d, normals=None):
        """Coefficient tensors of ln r in the free part (poly kinds with l >= 2 only)."""
        if self.kind != "poly" or self.l < 2:
            raise ValueError("log coefficient available for l >= 2 series kernels")
        A = _poly_free(d, self.l, log_only=True)
        B = _poly_free(d, self.l + 1, log_only=True)
        # ln r multiplies c s^p; derivatives of ln r itself feed the remainder, not the coefficient
        return compose(self.ca, A, self.cb, B, normals, self.params.lam, self.params.mu)

    def _kelvin_shift(self):
        # G_1 free part -I F_1 - tau grad grad F_2 equals mu Gamma^0 - tau_1 I / (8 pi)
        if self.kind == "poly" and self.l == 1:
            return self.cb / (8 * np.pi)
        return 0.0

    def regular(self, x, y, normals=None):
        """Lattice tensor minus its free part; finite at coincident points.

        Returns (G_reg, T_reg) on the pair grid; T_reg is None without normals."""
        A, zero = self.A.evaluate(x, y)
        B, _ = self.B.evaluate(x, y)
        nrm = None if normals is None else normals[:, None, :]
        G, T = compose(self.ca, A, self.cb, B, nrm, self.params.lam, self.params.mu)
        d = x[:, None, :] - y[None, :, :]
        off = ~zero
        nf = None if normals is None else np.broadcast_to(nrm, d.shape)[off]
        Gf, Tf = self.free(d[off], nf)
        G[off] -= Gf
        if T is not None:
            T[off] -= Tf
        G = G + self._kelvin_shift() * np.eye(2)
        return G, T
