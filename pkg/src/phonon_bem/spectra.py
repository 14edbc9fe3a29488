"""Physical spectra from characteristic values of the boundary-integral families.

Dirichlet eigenvalues of the inclusion, the modified (alpha = 0, mu -> infinity)
problem, the transition regime |alpha|^2 mu -> tau, finite-mu Bloch bands, and
the limiting band union with its gap criterion.
"""
from dataclasses import dataclass, field

import numpy as np

from .charvalue import OperatorFamily, RootWindow, scan_window
from .geometry import sample_mesh
from .kernels import LameParams
from .lattice import DEFAULT_CFG, ResonanceError
from .layer_ops import (
    assemble_A,
    assemble_A0_periodic,
    assemble_A_tau,
    assemble_kstar,
    assemble_single_layer,
    transition_poles,
)

DEFAULT_MATRIX_RATIO = LameParams(1.0, 1.0)


@dataclass(frozen=True)
class EigenProblemKind:
    """Which eigenproblem a family encodes."""

    kind: str
    rho: float = 1.0
    tau: float = 0.0
    direction: tuple = (1.0, 0.0)
    alpha: tuple = (0.0, 0.0)
    mu: float = float("inf")

    def __post_init__(self):
        if self.kind not in ("dirichlet", "modified", "transition", "bloch"):
            raise ValueError(f"unknown eigenproblem kind {self.kind!r}")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        d = np.asarray(self.direction, float)
        if self.kind == "transition" and abs(np.linalg.norm(d) - 1) > 1e-12:
            raise ValueError("direction must be a unit vector")


def _mesh(curve, N):
    return curve if hasattr(curve, "nodes") else sample_mesh(curve, N)


# ------------------------------------------------------------------ families


def dirichlet_family(mesh, inclusion):
    return OperatorFamily(lambda w: assemble_single_layer(mesh, "free", w, inclusion), "dirichlet", "w != 0")


def modified_family(mesh, inclusion, rho=1.0, matrix=DEFAULT_MATRIX_RATIO, cfg=DEFAULT_CFG):
    # K^{0,0}* is independent of w; assemble it once
    K = assemble_kstar(mesh, "periodic-static", 0.0, matrix, cfg=cfg).matrix
    return OperatorFamily(
        lambda w: assemble_A0_periodic(w, matrix, inclusion, mesh, rho, cfg, kstar=K), "modified", "w != 0"
    )


def transition_family(mesh, inclusion, tau, direction, rho=1.0, matrix=DEFAULT_MATRIX_RATIO, cfg=DEFAULT_CFG):
    K = assemble_kstar(mesh, "periodic-static", 0.0, matrix, cfg=cfg).matrix
    return OperatorFamily(
        lambda w: assemble_A_tau(tau, direction, w, matrix, inclusion, mesh, rho, cfg, kstar=K),
        "transition",
        "w away from the transition poles",
    )


def bloch_family(mesh, matrix, inclusion, alpha, rho=None, cfg=DEFAULT_CFG):
    alpha = tuple(float(a) for a in alpha)

    def ev(w):
        try:
            return assemble_A(alpha, w, matrix, inclusion, mesh, rho, cfg)
        except ResonanceError:
            # lattice resonance exactly on the sample: step off the real axis
            return assemble_A(alpha, w + 1e-6j, matrix, inclusion, mesh, rho, cfg)

    return OperatorFamily(ev, "bloch", "w > 0, non-resonant")


# ------------------------------------------------------------------ eigenvalues


def _scan(fam, window, coarse, log, **scan_kw):
    return scan_window(fam, window, coarse=coarse, log=log, **scan_kw)


def dirichlet_eigenvalues(curve, inclusion, window, N=128, N_scan=None, log=None, **scan_kw):
    """Characteristic values of S~^w: Dirichlet eigenfrequencies of the inclusion."""
    if window.lo <= 0:
        window = RootWindow(max(window.step, 1e-3), window.hi, window.step, window.radius, window.Q)
    mesh = _mesh(curve, N)
    coarse = dirichlet_family(sample_mesh(curve, N_scan), inclusion) if N_scan else None
    return _scan(dirichlet_family(mesh, inclusion), window, coarse, log, **scan_kw)


def modified_eigenvalues(curve, inclusion, rho, window, N=128, N_scan=None, matrix=DEFAULT_MATRIX_RATIO,
                         cfg=DEFAULT_CFG, log=None, **scan_kw):
    """Characteristic values of the alpha = 0 leading operator (modified problem)."""
    mesh = _mesh(curve, N)
    coarse = modified_family(sample_mesh(curve, N_scan), inclusion, rho, matrix, cfg) if N_scan else None
    return _scan(modified_family(mesh, inclusion, rho, matrix, cfg), window, coarse, log, **scan_kw)


def _split_window(window, poles, gap):
    """Sub-windows of ``window`` that keep ``gap`` away from every pole."""
    pieces = [(window.lo, window.hi)]
    for p in sorted(poles):
        nxt = []
        for lo, hi in pieces:
            if p - gap > lo:
                nxt.append((lo, min(hi, p - gap)))
            if p + gap < hi:
                nxt.append((max(lo, p + gap), hi))
        pieces = nxt
    return [RootWindow(lo, hi, window.step, window.radius, window.Q) for lo, hi in pieces if hi - lo > 2 * window.step]


def transition_eigenvalues(curve, inclusion, tau, direction, rho, window, N=128, N_scan=None,
                           matrix=DEFAULT_MATRIX_RATIO, cfg=DEFAULT_CFG, log=None, **scan_kw):
    """Characteristic values of the transition family; windows are cut around its poles."""
    mesh = _mesh(curve, N)
    fam = transition_family(mesh, inclusion, tau, direction, rho, matrix, cfg)
    coarse = transition_family(sample_mesh(curve, N_scan), inclusion, tau, direction, rho, matrix, cfg) if N_scan else None
    poles = transition_poles(tau, matrix, rho)
    out = []
    for sub in _split_window(window, poles, 2 * window.step):
        out.extend(_scan(fam, sub, coarse, log, **scan_kw))
    if log is not None and len(_split_window(window, poles, 2 * window.step)) > 1:
        log.append(f"transition window split around poles {poles[0]:.6g}, {poles[1]:.6g}")
    return sorted(out, key=lambda r: r.omega.real)


def bloch_eigenvalues(curve, matrix, inclusion, rho, alpha, window, N=128, N_scan=None, cfg=DEFAULT_CFG, log=None,
                      **scan_kw):
    """Finite-mu Bloch frequencies at quasi-momentum alpha (any alpha, including 0)."""
    a = np.asarray(alpha, float)
    if a.shape != (2,) or np.any(a < 0) or np.any(a >= 2 * np.pi):
        raise ValueError("alpha must lie in [0, 2 pi)^2")
    if window.lo <= 0:
        window = RootWindow(window.step, window.hi, window.step, window.radius, window.Q)
    mesh = _mesh(curve, N)
    coarse = bloch_family(sample_mesh(curve, N_scan), matrix, inclusion, a, rho, cfg) if N_scan else None
    return _scan(bloch_family(mesh, matrix, inclusion, a, rho, cfg), window, coarse, log, **scan_kw)


def expand(values):
    """Sorted real frequencies with multiplicities repeated."""
    out = []
    for v in values:
        out.extend([float(np.real(v.omega))] * int(v.multiplicity))
    return sorted(out)


# ------------------------------------------------------------------ band diagrams


def brillouin_path(samples_per_leg=8):
    """Gamma -> X -> M -> Gamma with the end point Gamma included once at each end."""
    G, X, M = np.array([0.0, 0.0]), np.array([np.pi, 0.0]), np.array([np.pi, np.pi])
    pts = []
    for a, b in ((G, X), (X, M), (M, G)):
        for s in np.arange(samples_per_leg) / samples_per_leg:
            pts.append(tuple(a + s * (b - a)))
    pts.append(tuple(G))
    return pts


@dataclass
class BandDiagram:
    path: list
    bands: list
    incomplete: list
    metadata: dict = field(default_factory=dict)


def band_sweep(curve, matrix, inclusion, rho=None, path=None, J=4, window=None, N=64, N_scan=32,
               near_gamma="exact", count="svd", cfg=DEFAULT_CFG, log=None):
    """First J frequencies per quasi-momentum sample.

    Multiplicities come from ``count`` ('svd' by default, 'contour' for the
    argument-principle count, which costs about 2 Q assemblies per root).

    near_gamma='exact' assembles the finite-mu operator at every sample.
    near_gamma='limit' uses the modified family at alpha = 0 and the transition
    family for 0 < |alpha| <= 3/sqrt(mu) with tau = |alpha|^2 mu."""
    if near_gamma not in ("exact", "limit"):
        raise ValueError("near_gamma must be 'exact' or 'limit'")
    path = brillouin_path() if path is None else [tuple(map(float, a)) for a in path]
    window = RootWindow(0.25, 20.0, 0.1) if window is None else window
    mesh = sample_mesh(curve, N)
    coarse_mesh = sample_mesh(curve, N_scan) if N_scan else None
    r = matrix.rho if rho is None else rho
    mu = matrix.mu
    bands, incomplete = [], []
    for alpha in path:
        a = np.asarray(alpha, float)
        # map onto [0, 2 pi) without changing the problem
        a = np.mod(a, 2 * np.pi)
        na = np.linalg.norm(np.where(a > np.pi, a - 2 * np.pi, a))
        sub = []
        try:
            if near_gamma == "limit" and na == 0:
                fam = modified_family(mesh, inclusion, r, matrix, cfg)
                crs = modified_family(coarse_mesh, inclusion, r, matrix, cfg) if coarse_mesh else None
                sub = scan_window(fam, window, coarse=crs, count=count, stop_after=J, log=log)
            elif near_gamma == "limit" and na <= 3 / np.sqrt(mu):
                tau = na ** 2 * mu
                d = tuple(np.where(a > np.pi, a - 2 * np.pi, a) / na)
                sub = transition_eigenvalues(mesh, inclusion, tau, d, r, window, matrix=matrix, cfg=cfg, log=log)
            else:
                fam = bloch_family(mesh, matrix, inclusion, a, rho, cfg)
                crs = bloch_family(coarse_mesh, matrix, inclusion, a, rho, cfg) if coarse_mesh else None
                sub = scan_window(fam, window, coarse=crs, count=count, stop_after=J, log=log)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            if log is not None:
                log.append(f"sample alpha={tuple(a)} failed: {exc}")
        vals = expand(sub)[:J]
        incomplete.append(len(vals) < J)
        bands.append(vals + [float("nan")] * (J - len(vals)))
    meta = {"mu": mu, "rho": r, "N": N, "N_scan": N_scan, "J": J, "near_gamma": near_gamma, "count": count,
            "window": [window.lo, window.hi, window.step]}
    return BandDiagram(list(path), bands, incomplete, meta)


# ------------------------------------------------------------------ limiting spectrum and gaps


@dataclass
class LimitingBands:
    intervals: list
    flags: list


def limiting_bands(omega, omega_tilde, tol=1e-6):
    """[0, w_1] u [0, w_2] u U_j [w~_j, w_{j+2}], merged into disjoint intervals.

    Components with w~_j > w_{j+2} + tol violate interlacing; they are flagged and left out."""
    w, wt = list(omega), list(omega_tilde)
    pieces, flags = [], []
    if w:
        pieces.append((0.0, w[min(1, len(w) - 1)]))
    for j, t in enumerate(wt):
        if j + 2 >= len(w):
            break
        hi = w[j + 2]
        if t > hi + tol:
            flags.append(f"j={j + 1}: w~_j = {t:.10g} exceeds w_(j+2) = {hi:.10g}")
            continue
        pieces.append((min(t, hi), hi))
    pieces.sort()
    merged = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return LimitingBands(merged, flags)


@dataclass
class Gap:
    j: int
    lower: float
    upper: float

    @property
    def width(self):
        return self.upper - self.lower


@dataclass
class GapReport:
    limiting: LimitingBands
    gaps: list
    verdicts: list
    rho: float


def gap_report(omega, omega_tilde, rho=1.0, tol=1e-6):
    """Gap opens at j when w_{j+1} < w~_j; the interval (w_{j+1}, w~_j) is missed.

    Coincident values (within tol relative) do not count as a gap."""
    w, wt = list(omega), list(omega_tilde)
    gaps, verdicts = [], []
    for j in range(1, min(len(w) - 1, len(wt)) + 1):
        lo, hi = w[j], wt[j - 1]
        ok = hi - lo > tol * (1 + abs(hi))
        verdicts.append(ok)
        if ok:
            gaps.append(Gap(j, lo, hi))
    return GapReport(limiting_bands(w, wt), gaps, verdicts, rho)


@dataclass
class InterlacingVerdict:
    j: int
    holds: bool
    lower_slack: float
    upper_slack: float


def interlacing_check(omega, omega_tilde, tol=1e-6):
    """w_j <= w~_j <= w_{j+2} for every j with both sides available."""
    out = []
    for j in range(1, len(omega_tilde) + 1):
        if j + 2 > len(omega):
            break
        lo = omega_tilde[j - 1] - omega[j - 1]
        hi = omega[j + 1] - omega_tilde[j - 1]
        out.append(InterlacingVerdict(j, lo >= -tol and hi >= -tol, lo, hi))
    return out
