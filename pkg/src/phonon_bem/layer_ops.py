"""Nystrom matrices for elastic layer potentials and the block operator families.

Densities are node-interleaved, (phi_1(t_0), phi_2(t_0), phi_1(t_1), ...), and
matrices act on nodal values (arc-length Jacobians are inside the weights).

Single layers use product integration for the ln(4 sin^2((t-s)/2)) part of the
kernel and the trapezoidal rule for the rest.  The static traction kernel is
split into its Cauchy part, integrated with a global trigonometric Hilbert
rule, and a smooth part; the dynamic-minus-static traction is log-singular and
uses the same product rule as the single layer.  Quasi-periodic operators add
the smooth lattice remainder with the trapezoidal rule.
"""
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    LameParams,
    dynamic_diagonal,
    kelvin_constants,
    matrix_from_radial,
    radial_dynamic,
    radial_static,
    traction_from_radial,
)
from .lattice import DEFAULT_CFG, LatticeKernel


# ---------------------------------------------------------------- quadrature weights


def kress_weights(N):
    """R[i, j] with sum_j R[i, j] f(t_j) ~ int_0^{2pi} ln(4 sin^2((t_i - s)/2)) f(s) ds."""
    k = np.arange(N)
    m = np.arange(1, N // 2)
    tk = 2 * np.pi * k / N
    row = -(4 * np.pi / N) * np.sum(np.cos(np.outer(tk, m)) / m, axis=1) - (4 * np.pi / N ** 2) * np.cos(N / 2 * tk)
    idx = (k[:, None] - k[None, :]) % N
    return row[idx]


def hilbert_weights(N):
    """H[i, j] with sum_j H[i, j] f(t_j) ~ (1/2pi) p.v. int cot((s - t_i)/2) f(s) ds.

    Odd-offset trapezoidal rule, exact for trigonometric polynomials of degree < N/2."""
    k = np.arange(N)
    diff = k[None, :] - k[:, None]
    odd = (diff % 2) != 0
    H = np.zeros((N, N))
    H[odd] = (2.0 / N) / np.tan(np.pi * diff[odd] / N)
    return H


def _log_sin(N):
    k = np.arange(N)
    dt = 2 * np.pi * (k[:, None] - k[None, :]) / N
    with np.errstate(divide="ignore"):
        out = np.log(4 * np.sin(dt / 2) ** 2)
    np.fill_diagonal(out, 0.0)
    return out


def to_matrix(blocks):
    """(N, M, 2, 2) kernel blocks -> (2N, 2M) interleaved matrix."""
    n, m = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * m)


def _pairs(mesh):
    d = mesh.nodes[:, None, :] - mesh.nodes[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    np.fill_diagonal(r, 1.0)
    xh = d / r[..., None]
    # diagonal: tangent direction so x xhat^T limits are right
    idx = np.arange(mesh.N)
    xh[idx, idx] = mesh.tangents
    return d, r, xh


def _product_rule(mesh, K, L, diag):
    """Blocks for kernel K = L ln r + smooth, given K, L off the diagonal and
    diag = lim (K - L ln r) + L ln|gamma'| on the diagonal (all without Jacobian)."""
    N = mesh.N
    R = kress_weights(N)
    ls = _log_sin(N)
    jac = mesh.jacobians
    K1 = 0.5 * L
    K2 = K - K1 * ls[..., None, None]
    idx = np.arange(N)
    K2[idx, idx] = diag
    return (R[..., None, None] * K1 + (2 * np.pi / N) * K2) * jac[None, :, None, None]


# ---------------------------------------------------------------- free-space pieces


def free_single_layer_blocks(mesh, omega, params):
    d, r, xh = _pairs(mesh)
    idx = np.arange(mesh.N)
    kc = kelvin_constants(params)
    lg = np.log(mesh.jacobians)
    tt = mesh.tangents[:, :, None] * mesh.tangents[:, None, :]
    eye = np.eye(2)
    if omega == 0:
        psi, _, chi, _ = radial_static(r, params)
        K = matrix_from_radial(xh, psi, chi)
        L = np.broadcast_to(kc.gamma1 / (2 * np.pi) * eye, K.shape).copy()
        diag = -(kc.gamma2 / (2 * np.pi)) * tt + (kc.gamma1 / (2 * np.pi)) * lg[:, None, None] * eye
    else:
        psi, _, chi, _ = radial_dynamic(r, omega, params)
        K = matrix_from_radial(xh, psi, chi)
        lp, _, lc, _ = radial_dynamic(r, omega, params, log_part=True)
        lp[idx, idx] = kc.gamma1 / (2 * np.pi)
        lc[idx, idx] = 0.0
        L = matrix_from_radial(xh, lp, lc)
        psi0, chi0 = dynamic_diagonal(omega, params)
        diag = (psi0 + kc.gamma1 / (2 * np.pi) * lg)[:, None, None] * eye - chi0 * tt
    return _product_rule(mesh, K.astype(complex), L.astype(complex), diag)


def _static_kstar_blocks(mesh, params):
    """Kelvin traction operator: Hilbert rule for the Cauchy part plus trapezoid."""
    N = mesh.N
    m = params.mu / (params.lam + 2 * params.mu)
    d, r, xh = _pairs(mesh)
    idx = np.arange(N)
    nx = mesh.normals[:, None, :]
    tx = mesh.tangents[:, None, :]
    jac = mesh.jacobians
    h = 2 * np.pi / N
    # smooth part (c / 2 pi r)[m I + 2(1-m) xhat xhat^T] |gamma'(s)|
    c_over_r = np.sum(d * nx, axis=-1) / r ** 2
    c_over_r[idx, idx] = 0.5 * mesh.curvature
    xx = xh[..., :, None] * xh[..., None, :]
    smooth = (c_over_r / (2 * np.pi))[..., None, None] * (m * np.eye(2) + 2 * (1 - m) * xx)
    blocks = h * smooth * jac[None, :, None, None]
    # Cauchy part (m / 2 pi) eps * k(t, s), k = -(x - y).tau_x |gamma'(s)| / r^2
    k = -np.sum(d * tx, axis=-1) / r ** 2 * jac[None, :]
    t = mesh.params
    dts = t[None, :] - t[:, None]
    with np.errstate(divide="ignore"):
        half_cot = 0.5 / np.tan(dts / 2)
    rem = k - half_cot
    a = jac ** 2
    b = np.sum(mesh.d1 * mesh.d2, axis=1)
    rem[idx, idx] = b / (2 * a)
    scal = np.pi * hilbert_weights(N) + h * rem
    eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
    blocks = blocks + (m / (2 * np.pi)) * scal[..., None, None] * eps
    return blocks


def free_kstar_blocks(mesh, omega, params):
    """Blocks of the free-space adjoint double layer (traction of the single layer)."""
    blocks = _static_kstar_blocks(mesh, params).astype(complex)
    if omega == 0:
        return blocks
    d, r, xh = _pairs(mesh)
    idx = np.arange(mesh.N)
    nx = mesh.normals[:, None, :]
    _, dp, ch, dc = radial_dynamic(r, omega, params)
    _, dp0, ch0, dc0 = radial_static(r, params)
    D = traction_from_radial(xh, nx, r, dp, ch, dc, params) - traction_from_radial(xh, nx, r, dp0, ch0, dc0, params)
    _, ldp, lch, ldc = radial_dynamic(r, omega, params, log_part=True)
    L = traction_from_radial(xh, nx, r, ldp, lch, ldc, params)
    L[idx, idx] = 0.0
    D[idx, idx] = 0.0
    return blocks + _product_rule(mesh, D, L, np.zeros((mesh.N, 2, 2), complex))


def _series_free_blocks(mesh, ker, traction):
    d, r, xh = _pairs(mesh)
    idx = np.arange(mesh.N)
    dd = d.copy()
    dd[idx, idx] = mesh.tangents  # placeholder, overwritten below
    nrm = np.broadcast_to(mesh.normals[:, None, :], d.shape) if traction else None
    G, T = ker.free(dd, nrm)
    LG, LT = ker.log_coefficient(dd, nrm)
    K, L = (T, LT) if traction else (G, LG)
    K = K.astype(complex)
    L = L.astype(complex)
    L[idx, idx] = 0.0
    return _product_rule(mesh, K, L, np.zeros((mesh.N, 2, 2), complex))


def _regular_blocks(mesh, ker, traction):
    G, T = ker.regular(mesh.nodes, mesh.nodes, mesh.normals if traction else None)
    K = T if traction else G
    return (2 * np.pi / mesh.N) * K * mesh.jacobians[None, :, None, None]


# ---------------------------------------------------------------- public assembly


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    matrix: np.ndarray
    kind: str
    omega: complex
    alpha: tuple = None
    mesh: object = field(default=None, repr=False)

    def __matmul__(self, v):
        return self.matrix @ v


def _lattice_kernel(kernel, omega, params, alpha, l, cfg):
    if kernel == "qp":
        if omega == 0:
            if alpha is None or np.all(np.asarray(alpha) == 0):
                raise ValueError("alpha = 0 static kernel: use kernel='periodic-static'")
            return LatticeKernel.build("poly", alpha, 0.0, params, cfg, l=1, scale=1 / params.mu)
        return LatticeKernel.build("helmholtz", alpha, omega, params, cfg)
    if kernel == "periodic-static":
        return LatticeKernel.build("poly", (0.0, 0.0), 0.0, params, cfg, l=1, scale=1 / params.mu)
    if kernel == "series":
        return LatticeKernel.build("poly", alpha, omega, params.scaled(1.0), cfg, l=l)
    raise ValueError(f"unknown kernel {kernel!r}")


def _assemble(mesh, kernel, omega, params, alpha, l, cfg, traction):
    if kernel == "free":
        blocks = (free_kstar_blocks if traction else free_single_layer_blocks)(mesh, omega, params)
        return to_matrix(blocks)
    ker = _lattice_kernel(kernel, omega, params, alpha, l, cfg)
    if kernel == "series" and l >= 2:
        blocks = _series_free_blocks(mesh, ker, traction)
    elif kernel == "series":
        # G_1 = mu G^{alpha,0}: Kelvin singular part with mu = 1 constants
        unit = params.scaled(1.0)
        blocks = (free_kstar_blocks if traction else free_single_layer_blocks)(mesh, 0.0, unit).astype(complex)
    else:
        free_omega = 0.0 if ker.kind == "poly" else omega
        blocks = (free_kstar_blocks if traction else free_single_layer_blocks)(mesh, free_omega, params).astype(complex)
    blocks = blocks + _regular_blocks(mesh, ker, traction)
    return to_matrix(blocks)


def assemble_single_layer(mesh, kernel="free", omega=1.0, params=None, alpha=None, l=1, cfg=DEFAULT_CFG):
    """Nystrom matrix of the single layer potential on the boundary.

    kernel: 'free' (Kupradze, or Kelvin when omega == 0), 'qp' (G^{alpha,omega},
    or G^{alpha,0} when omega == 0), 'periodic-static' (G^{0,0}) or 'series'
    (G_l, Lame constants scaled to mu = 1)."""
    M = _assemble(mesh, kernel, omega, params, alpha, l, cfg, traction=False)
    return DiscretizedOperator(M, f"single:{kernel}", omega, None if alpha is None else tuple(alpha), mesh)


def assemble_kstar(mesh, kernel="free", omega=1.0, params=None, alpha=None, l=1, cfg=DEFAULT_CFG):
    """Nystrom matrix of the traction (adjoint double layer) operator, principal value."""
    M = _assemble(mesh, kernel, omega, params, alpha, l, cfg, traction=True)
    return DiscretizedOperator(M, f"kstar:{kernel}", omega, None if alpha is None else tuple(alpha), mesh)


def double_layer_from_kstar(kstar, mesh):
    """Double layer matrix from the adjoint: K = W^-1 (K*)^T W with W the nodal weights."""
    w = np.repeat(mesh.jacobians, 2)
    return (kstar.T * w[None, :]) / w[:, None]


def integral_row(mesh):
    """(2, 2N) matrix of int_{boundary} phi dsigma."""
    w = mesh.weights
    out = np.zeros((2, 2 * mesh.N))
    out[0, 0::2] = w
    out[1, 1::2] = w
    return out


# ---------------------------------------------------------------- block operators


@dataclass(frozen=True, eq=False)
class BlockOperator:
    matrix: np.ndarray
    family: str
    omega: complex
    alpha: tuple = None

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    def block(self, i, j):
        n = self.n
        return self.matrix[i * n:(i + 1) * n, j * n:(j + 1) * n]


def _with_rho(params, rho):
    if rho is None:
        return params
    return LameParams(params.lam, params.mu, rho)


def _blocks(b11, b12, b21, b22):
    return np.block([[b11, b12], [b21, b22]]).astype(complex)


def _inclusion_column(mesh, omega, incl):
    S = assemble_single_layer(mesh, "free", omega, incl).matrix
    Ks = assemble_kstar(mesh, "free", omega, incl).matrix
    return S, 0.5 * np.eye(S.shape[0]) - Ks


def assemble_A(alpha, omega, matrix_params, inclusion_params, mesh, rho=None, cfg=DEFAULT_CFG):
    """[[S~, -S^{alpha,w}], [1/2 - K~*, 1/2 + K^{alpha,w}*]]; the matrix phase uses rho w^2."""
    mp = _with_rho(matrix_params, rho)
    S_in, C21 = _inclusion_column(mesh, omega, inclusion_params)
    S = assemble_single_layer(mesh, "qp", omega, mp, alpha, cfg=cfg).matrix
    K = assemble_kstar(mesh, "qp", omega, mp, alpha, cfg=cfg).matrix
    I = np.eye(S.shape[0])
    return BlockOperator(_blocks(S_in, -S, C21, 0.5 * I + K), "A", omega, tuple(alpha))


def assemble_A0(alpha, omega, matrix_params, inclusion_params, mesh, cfg=DEFAULT_CFG, kstar=None):
    """Leading large-mu operator for alpha != 0: [[S~, 0], [1/2 - K~*, 1/2 + K^{alpha,0}*]].

    ``kstar`` may carry a precomputed K^{alpha,0}* matrix (it does not depend on omega)."""
    if np.all(np.asarray(alpha) == 0):
        raise ValueError("assemble_A0 needs alpha != 0; use assemble_A0_periodic")
    S_in, C21 = _inclusion_column(mesh, omega, inclusion_params)
    K = assemble_kstar(mesh, "qp", 0.0, matrix_params, alpha, cfg=cfg).matrix if kstar is None else kstar
    I = np.eye(S_in.shape[0])
    return BlockOperator(_blocks(S_in, np.zeros_like(S_in), C21, 0.5 * I + K), "A0", omega, tuple(alpha))


def _a0_periodic(omega, matrix_params, inclusion_params, mesh, rho, cfg, b12_scale, kstar=None):
    S_in, C21 = _inclusion_column(mesh, omega, inclusion_params)
    if kstar is None:
        kstar = assemble_kstar(mesh, "periodic-static", 0.0, matrix_params, cfg=cfg).matrix
    K = kstar
    I = np.eye(S_in.shape[0])
    ones = np.tile(np.eye(2), (mesh.N, 1))  # (2N, 2) constant-vector embedding
    B12 = -ones @ b12_scale @ integral_row(mesh)
    return _blocks(S_in, B12, C21, 0.5 * I + K)


def assemble_A0_periodic(omega, matrix_params, inclusion_params, mesh, rho=None, cfg=DEFAULT_CFG, kstar=None):
    """alpha = 0 leading operator with block (1,2) = -(1/(rho w^2)) int . dsigma."""
    if omega == 0:
        raise ValueError("omega = 0 is excluded for the periodic leading operator")
    r = matrix_params.rho if rho is None else rho
    M = _a0_periodic(omega, matrix_params, inclusion_params, mesh, r, cfg, np.eye(2) / (r * omega ** 2), kstar)
    return BlockOperator(M, "A0_periodic", omega, (0.0, 0.0))


def transition_poles(tau, matrix_params, rho=None):
    """Values of w at which the transition block is singular: rho w^2 = tau and tau / kappa,
    with kappa = mu / (lambda + 2 mu)."""
    r = matrix_params.rho if rho is None else rho
    kappa = matrix_params.mu / (matrix_params.lam + 2 * matrix_params.mu)
    return np.sqrt(tau / r), np.sqrt(tau / (kappa * r))


def assemble_A_tau(tau, direction, omega, matrix_params, inclusion_params, mesh, rho=None, cfg=DEFAULT_CFG,
                   guard=1e-10, kstar=None):
    """Transition-regime operator; tau = lim |alpha|^2 mu along the unit direction d.

    Block (1,2) is -[I/(rho w^2 - tau) + d d^T (tau/kappa - tau)/((rho w^2 - tau)(rho w^2 - tau/kappa))] int,
    the zero-order Fourier coefficient of G^{alpha,w} in that limit with lambda/mu held fixed.
    For lambda = 0 (kappa = 1/2) the second pole sits at 2 tau."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    r = matrix_params.rho if rho is None else rho
    kappa = matrix_params.mu / (matrix_params.lam + 2 * matrix_params.mu)
    w2 = r * omega ** 2
    if abs(w2 - tau) <= guard * (1 + tau) or abs(w2 - tau / kappa) <= guard * (1 + tau):
        raise ZeroDivisionError("rho w^2 coincides with a transition pole")
    dvec = np.asarray(direction, float)
    dvec = dvec / np.linalg.norm(dvec)
    lon = (tau / kappa - tau) / ((w2 - tau) * (w2 - tau / kappa))
    coef = np.eye(2) / (w2 - tau) + lon * np.outer(dvec, dvec)
    M = _a0_periodic(omega, matrix_params, inclusion_params, mesh, r, cfg, coef, kstar)
    return BlockOperator(M, "A_tau", omega, (0.0, 0.0))


def assemble_Al(l, alpha, omega, matrix_params, mesh, rho=None, cfg=DEFAULT_CFG):
    """Coefficient of mu^{-l}: [[0, -S_l], [0, K*_{l+1}]] with G_l from the series term.

    Lame constants enter through lambda/mu only; the density through (rho w^2)^(l-1)."""
    if int(l) != l or l < 1:
        raise ValueError("l must be a positive integer")
    mp = _with_rho(matrix_params, rho)
    S = assemble_single_layer(mesh, "series", omega, mp, alpha, l=int(l), cfg=cfg).matrix
    K = assemble_kstar(mesh, "series", omega, mp, alpha, l=int(l) + 1, cfg=cfg).matrix
    Z = np.zeros_like(S)
    return BlockOperator(_blocks(Z, -S, Z, K), f"A{int(l)}", omega, tuple(alpha))


# ---------------------------------------------------------------- off-surface evaluation


def trig_upsample(values, factor):
    """Trigonometric interpolation of nodal values (N, ...) onto factor*N nodes."""
    N = values.shape[0]
    M = N * factor
    c = np.fft.fft(values, axis=0)
    out = np.zeros((M,) + values.shape[1:], complex)
    h = N // 2
    out[:h] = c[:h]
    out[M - h + 1:] = c[h + 1:]
    out[h] = 0.5 * c[h]
    out[M - h] = 0.5 * c[h]
    return np.fft.ifft(out, axis=0) * factor


def layer_fields_off(targets, target_normals, mesh, density, kernel="free", omega=1.0, params=None, alpha=None,
                     cfg=DEFAULT_CFG, upsample=16, traction=True, chunk_pairs=250_000):
    """Single layer value and traction at points off the boundary.

    The free-space part is summed on a trigonometrically refined copy of the
    curve so targets may sit close to the boundary; the smooth lattice
    remainder uses the original nodes.  Targets are processed in chunks of
    about ``chunk_pairs`` target-source pairs.  With traction=False the second
    output is None."""
    from .geometry import sample_mesh
    from .kernels import fundamental_matrix, kelvin_matrix, traction_kernel

    phi = np.asarray(density).reshape(mesh.N, 2)
    fine = sample_mesh(mesh.curve, mesh.N * upsample, clearance=0.0)
    pf = trig_upsample(phi, upsample)
    wf = fine.weights[None, :, None, None]
    z_all = np.atleast_2d(targets)
    nz_all = np.broadcast_to(np.atleast_2d(target_normals), z_all.shape)
    ker = None
    free_omega = omega
    if kernel != "free":
        ker = _lattice_kernel(kernel, omega, params, alpha, 1, cfg)
        if ker.kind == "poly":
            free_omega = 0.0
    step = max(1, chunk_pairs // fine.N)
    us, ts = [], []
    for a in range(0, len(z_all), step):
        z, nz = z_all[a:a + step], nz_all[a:a + step]
        d = z[:, None, :] - fine.nodes[None, :, :]
        G = kelvin_matrix(d, params) if free_omega == 0 else fundamental_matrix(d, free_omega, params)
        u = np.einsum("mnik,nk->mi", G * wf, pf)
        t = None
        if traction:
            nn = np.broadcast_to(nz[:, None, :], d.shape)
            T = traction_kernel(d, nn, free_omega, params)
            t = np.einsum("mnik,nk->mi", T * wf, pf)
        if ker is not None:
            Gr, Tr = ker.regular(z, mesh.nodes, nz)
            wc = mesh.weights[None, :, None, None]
            u = u + np.einsum("mnik,nk->mi", Gr * wc, phi)
            if traction:
                t = t + np.einsum("mnik,nk->mi", Tr * wc, phi)
        us.append(u)
        ts.append(t)
    u = np.concatenate(us)
    return u, (np.concatenate(ts) if traction else None)
