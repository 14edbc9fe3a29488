"""High-contrast asymptotics of Bloch frequencies as mu -> infinity.

The first-order coefficient comes from the cell corrector v0 (an alpha-quasi-
periodic static field in the matrix whose traction matches the inclusion
eigenmode).  Higher orders come from contour traces of products of the
leading operator inverse with the series operators A_l.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg as sla

from .charvalue import ContourRejected, count_in_contour, refine_root
from .geometry import sample_mesh
from .lattice import DEFAULT_CFG
from .layer_ops import (
    assemble_A0,
    assemble_A0_periodic,
    assemble_A_tau,
    assemble_Al,
    assemble_kstar,
    assemble_single_layer,
    layer_fields_off,
)
from .spectra import dirichlet_family


class DegenerateEigenvalue(ValueError):
    """The limit eigenvalue is not simple; the expansion pathway does not apply."""


@dataclass
class DirichletEigenpair:
    omega0: float
    phi: np.ndarray  # (N, 2) nodal traction density
    u0_norm_sq: float
    mesh: object
    inclusion: object
    residual: float
    center: tuple = (0.5, 0.5)


@dataclass
class LeadingOrderResult:
    coefficient: float
    corrector_energy: float
    alpha: tuple


# ------------------------------------------------------------------ volume quadrature


def polar_quadrature(mesh, center, n_radial=24, upsample=2):
    """Boundary-fitted polar rule on a star-shaped D: x = c + s (gamma(t) - c).

    Gauss-Legendre in s on [0, 1], trapezoid in t on ``upsample`` times the mesh
    nodes.  Returns points (M, 2) and weights (M,)."""
    c = np.asarray(center, float)
    nt = upsample * mesh.N
    t = 2 * np.pi * np.arange(nt) / nt
    x, d1, _ = mesh.curve.derivatives(t)
    rel = x - c
    jac_t = np.abs(rel[:, 0] * d1[:, 1] - rel[:, 1] * d1[:, 0]) * (2 * np.pi / nt)
    sg, wg = np.polynomial.legendre.leggauss(n_radial)
    s, ws = 0.5 * (sg + 1), 0.5 * wg
    pts = c + s[:, None, None] * rel[None, :, :]
    w = (s * ws)[:, None] * jac_t[None, :]
    return pts.reshape(-1, 2), w.ravel()


def _star_center(curve):
    return tuple(np.asarray(getattr(curve, "center", (0.5, 0.5)), float))


def u0_norm_sq_polar(mesh, phi, omega0, inclusion, center, n_radial=24, upsample_t=2, upsample=32):
    """int_D |u0|^2 with u0 = -S~^{w0} phi evaluated by the layer potential."""
    pts, w = polar_quadrature(mesh, center, n_radial, upsample_t)
    normals = np.tile([1.0, 0.0], (len(pts), 1))
    u, _ = layer_fields_off(pts, normals, mesh, phi, "free", omega0, inclusion, upsample=upsample, traction=False)
    return float(np.sum(w * np.sum(np.abs(u) ** 2, axis=1)))


def u0_norm_sq_rellich(mesh, phi, omega0, inclusion, center):
    """Boundary identity 2 w0^2 int_D |u0|^2 = Re int (x - c).N  phi . conj(d_N u0).

    With u0 = 0 on the boundary, d_N u0 has normal part phi.N/(lam+2mu) and
    tangential part phi.tau/mu."""
    N, T = mesh.normals, mesh.tangents
    pn = np.sum(phi * N, axis=1)
    pt = np.sum(phi * T, axis=1)
    g = (pn / (inclusion.lam + 2 * inclusion.mu))[:, None] * N + (pt / inclusion.mu)[:, None] * T
    xn = np.sum((mesh.nodes - np.asarray(center)) * N, axis=1)
    val = mesh.integrate(xn * np.real(np.sum(phi * np.conj(g), axis=1)))
    return float(val / (2 * omega0 ** 2))


# ------------------------------------------------------------------ eigenpair and corrector


def dirichlet_eigenpair(curve, inclusion, omega_guess, N=128, norm_method="polar", radius=0.02, Q=32, n_radial=24):
    """Refine a simple Dirichlet eigenfrequency and extract phi = d u0 / d nu~ |_-.

    Raises DegenerateEigenvalue when the contour count around the root is not 1."""
    mesh = curve if hasattr(curve, "nodes") else sample_mesh(curve, N)
    fam = dirichlet_family(mesh, inclusion)
    w, rel, res = refine_root(fam, float(omega_guess), h=1e-2)
    if rel > 1e-6 or abs(w.imag) > 1e-6 * (1 + abs(w)):
        raise ArithmeticError(f"no Dirichlet eigenfrequency near {omega_guess} (sigma ratio {rel:.2e})")
    w0 = float(w.real)
    cnt = count_in_contour(fam, w0, radius, Q)
    if round(cnt.count) != 1:
        raise DegenerateEigenvalue(f"multiplicity {cnt.count:.3f} at w0 = {w0:.10g}; expansion needs a simple eigenvalue")
    A = fam(w0)
    _, s, Vh = sla.svd(A)
    phi_vec = Vh[-1].conj()
    # fix the phase so the largest entry is real positive
    k = np.argmax(np.abs(phi_vec))
    phi_vec = phi_vec * np.exp(-1j * np.angle(phi_vec[k]))
    phi = phi_vec.reshape(-1, 2)
    center = _star_center(mesh.curve)
    if norm_method == "polar":
        nsq = u0_norm_sq_polar(mesh, phi, w0, inclusion, center, n_radial)
    elif norm_method == "rellich":
        nsq = u0_norm_sq_rellich(mesh, phi, w0, inclusion, center)
    else:
        raise ValueError("norm_method must be 'polar' or 'rellich'")
    if not nsq > 0:
        raise ArithmeticError("non-positive eigenfunction norm")
    resid = float(np.linalg.norm(A @ phi_vec) / np.linalg.norm(A, 2))
    return DirichletEigenpair(w0, phi, nsq, mesh, inclusion, resid, center)


@dataclass
class CellCorrector:
    alpha: tuple
    psi0: np.ndarray  # (N, 2) density solving (1/2 + K^{alpha,0}*) psi0 = phi
    values: np.ndarray  # (N, 2) boundary values of v0 / mu-free scaling: mu S^{alpha,0} psi0
    matrix: object


def cell_corrector(pair, alpha, matrix, cfg=DEFAULT_CFG):
    """v0 = mu S^{alpha,0} (1/2 + K^{alpha,0}*)^{-1} phi on the boundary (mu cancels)."""
    alpha = tuple(float(a) for a in alpha)
    if np.allclose(alpha, 0):
        raise ValueError("the cell corrector needs alpha != 0")
    mesh = pair.mesh
    unit = matrix.scaled(1.0)
    K = assemble_kstar(mesh, "qp", 0.0, unit, alpha, cfg=cfg).matrix
    S = assemble_single_layer(mesh, "qp", 0.0, unit, alpha, cfg=cfg).matrix
    M = 0.5 * np.eye(K.shape[0]) + K
    psi = np.linalg.solve(M, pair.phi.ravel())
    if not np.all(np.isfinite(psi)):
        raise ArithmeticError("1/2 + K^{alpha,0}* solve failed")
    return CellCorrector(alpha, psi.reshape(-1, 2), (S @ psi).reshape(-1, 2), matrix)


def corrector_energy(pair, corr):
    """E(v0)/mu = -int_{dD} phi . conj(v0) dsigma (the traction of v0 is mu phi)."""
    return float(np.real(-pair.mesh.integrate(np.sum(pair.phi * np.conj(corr.values), axis=1))))


def leading_coefficient(pair, corr, tol=1e-10):
    """c1 in w_mu - w0 = c1/mu + O(1/mu^2)."""
    E = corrector_energy(pair, corr)
    scale = pair.mesh.integrate(np.sum(np.abs(pair.phi) ** 2, axis=1))
    if E < -tol * max(scale, 1.0):
        raise ArithmeticError(f"negative corrector energy {E:.3e}")
    return LeadingOrderResult(-max(E, 0.0) / (2 * pair.omega0 * pair.u0_norm_sq), E, corr.alpha)


# ------------------------------------------------------------------ contour expansion


class _SeriesOperators:
    """A_l(w) from one assembly at w = 1: block (1,2) scales as w^(2(l-1)), block (2,2) as w^(2l)."""

    def __init__(self, l_max, alpha, matrix, mesh, rho=None, cfg=DEFAULT_CFG):
        self.blocks = []
        for l in range(1, l_max + 1):
            M = assemble_Al(l, alpha, 1.0, matrix, mesh, rho, cfg).matrix
            n = M.shape[0] // 2
            self.blocks.append((M[:n, n:].copy(), M[n:, n:].copy(), l))
        self.n = self.blocks[0][0].shape[0]

    def __call__(self, l, w):
        b12, b22, _ = self.blocks[l - 1]
        n = self.n
        out = np.zeros((2 * n, 2 * n), complex)
        out[:n, n:] = b12 * w ** (2 * (l - 1))
        out[n:, n:] = b22 * w ** (2 * l)
        return out


def _compositions(n, p):
    for parts in product(range(1, n + 1), repeat=p):
        if sum(parts) == n:
            yield parts


def contour_terms(A0, Al, center, n_max=3, radius=0.02, Q=32, sigma_guard=1e-7):
    """T_n = (1/2 pi i) sum_p (1/p) tr oint B_{n,p} dw for n = 1..n_max.

    B_{n,p} = (-1)^p sum over compositions n1+..+np = n of X_{n1} ... X_{np},
    X_l = A0(w)^{-1} A_l(w).  Trapezoidal rule on the circle."""
    if n_max > 3 or n_max < 1:
        raise ValueError("orders 1..3 are supported")
    acc = np.zeros(n_max, complex)
    for q in range(Q):
        e = np.exp(2j * np.pi * q / Q)
        w = center + radius * e
        M0 = np.asarray(getattr(A0(w), "matrix", A0(w)))
        sv = sla.svdvals(M0)
        if sv[-1] / sv[0] < sigma_guard:
            raise ContourRejected(f"leading operator nearly singular at w = {w:.6g}")
        lu = sla.lu_factor(M0)
        X = [sla.lu_solve(lu, Al(l, w)) for l in range(1, n_max + 1)]
        for n in range(1, n_max + 1):
            tot = 0.0 + 0.0j
            for p in range(1, n + 1):
                sp = 0.0 + 0.0j
                for parts in _compositions(n, p):
                    P = X[parts[0] - 1]
                    for k in parts[1:]:
                        P = P @ X[k - 1]
                    sp += np.trace(P)
                tot += (-1) ** p * sp / p
            acc[n - 1] += tot * radius * e
    return acc / Q


def expansion_terms(pair, alpha, matrix, n_max=3, radius=0.02, Q=32, rho=None, cfg=DEFAULT_CFG):
    """Coefficients of mu^{-n} in w_mu - w0 for alpha != 0 (n <= 3)."""
    mesh, incl = pair.mesh, pair.inclusion
    alpha = tuple(float(a) for a in alpha)
    K = assemble_kstar(mesh, "qp", 0.0, matrix, alpha, cfg=cfg).matrix
    series = _SeriesOperators(n_max, alpha, matrix, mesh, rho, cfg)
    A0 = lambda w: assemble_A0(alpha, w, matrix, incl, mesh, cfg, kstar=K)
    return contour_terms(A0, series, pair.omega0, n_max, radius, Q)


def periodic_expansion_terms(omega_tilde, curve_mesh, matrix, inclusion, rho=1.0, n_max=3, radius=0.02, Q=32,
                             cfg=DEFAULT_CFG):
    """Coefficients of mu^{-n} in w_mu^0 - w~ around a simple modified eigenvalue."""
    mesh = curve_mesh
    K = assemble_kstar(mesh, "periodic-static", 0.0, matrix, cfg=cfg).matrix
    series = _SeriesOperators(n_max, (0.0, 0.0), matrix, mesh, rho, cfg)
    A0 = lambda w: assemble_A0_periodic(w, matrix, inclusion, mesh, rho, cfg, kstar=K)
    return contour_terms(A0, series, omega_tilde, n_max, radius, Q)


def transition_expansion(omega_tau, tau, direction, mesh, matrix, inclusion, rho=1.0, radius=0.02, Q=32,
                         cfg=DEFAULT_CFG):
    """First-order coefficient of 1/mu around a simple transition eigenvalue.

    Uses the traced form -(1/2 pi i) tr oint A_tau^{-1} A_1^{0,w} dw, i.e. the
    n = 1 term of the general expansion with A0 replaced by A_tau."""
    K = assemble_kstar(mesh, "periodic-static", 0.0, matrix, cfg=cfg).matrix
    series = _SeriesOperators(1, (0.0, 0.0), matrix, mesh, rho, cfg)
    A0 = lambda w: assemble_A_tau(tau, direction, w, matrix, inclusion, mesh, rho, cfg, kstar=K)
    return contour_terms(A0, series, omega_tau, 1, radius, Q)[0]
