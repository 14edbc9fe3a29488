"""Numerical self-checks run by ``phonon-bem validate``.

Each check returns a CheckResult with the measured value and its threshold.
"""
from dataclasses import dataclass

import numpy as np

from .charvalue import RootWindow
from .geometry import Circle, area_of, sample_mesh
from .lattice import LatticeSumConfig, qp_green
from .layer_ops import assemble_kstar, double_layer_from_kstar, layer_fields_off
from .oracles import disk_dirichlet_eigenvalues, expanded
from .spectra import dirichlet_eigenvalues, expand


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.threshold)


def _test_density(mesh):
    t = mesh.params
    return np.stack([np.cos(t) + 0.3 * np.sin(2 * t), 0.5 * np.sin(3 * t) - 0.2], 1).astype(complex)


def jump_residual(mesh, kernel, omega, params, alpha=None, n_probe=8, upsample=None, cfg=None):
    """max over probes and sides of |lim_{h->0+-} traction - (+-1/2 + K*) phi|.

    The one-sided limits use cubic extrapolation from h = 1..4e-3; by default the
    off-surface sums run on at least 8192 refined nodes."""
    from .lattice import DEFAULT_CFG

    upsample = max(1, -(-8192 // mesh.N)) if upsample is None else upsample
    cfg = DEFAULT_CFG if cfg is None else cfg
    phi = _test_density(mesh)
    Kp = (assemble_kstar(mesh, kernel, omega, params, alpha, cfg=cfg).matrix @ phi.ravel()).reshape(-1, 2)
    idx = np.arange(0, mesh.N, max(1, mesh.N // n_probe))
    x0, n0 = mesh.nodes[idx], mesh.normals[idx]
    hs = np.array([1.0, 2.0, 3.0, 4.0]) * 1e-3
    extrap = np.array([4.0, -6.0, 4.0, -1.0])
    worst = 0.0
    for side in (1, -1):
        vals = np.array([
            layer_fields_off(x0 + side * h * n0, n0, mesh, phi, kernel, omega, params, alpha, cfg, upsample)[1]
            for h in hs
        ])
        lim = np.tensordot(extrap, vals, axes=(0, 0))
        worst = max(worst, float(np.abs(lim - (side * 0.5 * phi[idx] + Kp[idx])).max()))
    return worst


def constant_density_defect(mesh, params, cfg=None):
    """|| (1/2 + K^{0,0}) phi_c - |Y \\ D| phi_c ||_inf over two constant vectors."""
    from .lattice import DEFAULT_CFG

    cfg = DEFAULT_CFG if cfg is None else cfg
    K = double_layer_from_kstar(assemble_kstar(mesh, "periodic-static", 0.0, params, cfg=cfg).matrix, mesh)
    frac = 1.0 - area_of(mesh.curve)
    worst = 0.0
    for c in ((1.0, 0.0), (0.3, -1.1)):
        v = np.tile(c, mesh.N).astype(complex)
        worst = max(worst, float(np.abs(0.5 * v + K @ v - frac * v).max()))
    return worst


def quasi_periodicity_defect(alpha, omega, params, M=40, seed=7, n_points=12):
    """max relative |G(d + e_j) - e^{i alpha_j} G(d)| over random d with |d| >= 0.1."""
    rng = np.random.default_rng(seed)
    cfg = LatticeSumConfig(M=M)
    worst = 0.0
    pts = []
    while len(pts) < n_points:
        d = rng.uniform(-0.5, 0.5, 2)
        if np.linalg.norm(d) >= 0.1:
            pts.append(d)
    for d in pts:
        g = qp_green(d, alpha, omega, params, cfg)
        for j, e in enumerate(np.eye(2)):
            g2 = qp_green(d + e, alpha, omega, params, cfg)
            rel = np.abs(g2 - np.exp(1j * alpha[j]) * g).max() / np.abs(g).max()
            worst = max(worst, float(rel))
    return worst


def disk_oracle_error(curve, inclusion, window, N, count=6, N_scan=None):
    """Max relative error of the first ``count`` Dirichlet values (with multiplicity) against
    the Bessel determinant; infinity when the multiplicity pattern differs."""
    ref = expanded(disk_dirichlet_eigenvalues(curve.radius, inclusion.lam, inclusion.mu, inclusion.rho,
                                              omega_max=window.hi + 1.0), count)
    got = expand(dirichlet_eigenvalues(curve, inclusion, window, N=N, N_scan=N_scan))[:count]
    if len(got) < count or len(ref) < count:
        return float("inf")
    return float(np.max(np.abs(np.array(got) - np.array(ref)) / np.array(ref)))


def run_validation(curve, inclusion, matrix, N=128, window=None, include_oracle=True):
    """Standard check list; thresholds follow the package's accuracy targets."""
    mesh = sample_mesh(curve, N)
    unit = matrix.scaled(1.0)
    out = [
        CheckResult("jump_free", jump_residual(mesh, "free", 5.0, inclusion), 1e-5),
        CheckResult("jump_quasi_periodic", jump_residual(mesh, "qp", 3.0, unit, (1.0, 2.0)), 1e-5),
        CheckResult("constant_density", constant_density_defect(mesh, unit), 1e-8),
        CheckResult("quasi_periodicity", quasi_periodicity_defect((1.0, 2.0), 3.0, unit), 1e-9),
    ]
    if include_oracle and isinstance(curve, Circle):
        w = window or RootWindow(8.0, 18.5, 0.1)
        scale = np.sqrt(inclusion.mu / inclusion.rho) * 0.3 / curve.radius
        w = RootWindow(w.lo * scale, w.hi * scale, w.step * scale) if window is None else w
        out.append(CheckResult("disk_dirichlet_oracle", disk_oracle_error(curve, inclusion, w, N), 1e-5))
    return out

