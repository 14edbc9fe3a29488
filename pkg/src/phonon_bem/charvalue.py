"""Characteristic values of matrix-valued families w -> A(w).

Roots are bracketed by a grid scan of the smallest singular value, refined by
Muller's method and counted with the contour trace integral
(1/2 pi i) tr oint A(w)^{-1} A'(w) dw.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class ContourRejected(ArithmeticError):
    """The counting contour passes too close to a characteristic value."""


@dataclass
class OperatorFamily:
    """Deterministic map from complex w to a square matrix.

    ``evaluate`` may return an ndarray or any object with a ``matrix``
    attribute (block and discretized operators)."""

    evaluate: callable
    tag: str = "family"
    domain: str = "complex plane"

    def __call__(self, omega):
        out = self.evaluate(omega)
        return np.asarray(getattr(out, "matrix", out))


def _as_family(family):
    return family if isinstance(family, OperatorFamily) else OperatorFamily(family)


def scalar_indicator(family, omega, kind="sigma"):
    """sigma_min(A(w)) (default) or log|det A(w)|."""
    A = _as_family(family)(omega)
    if kind == "sigma":
        return float(sla.svdvals(A)[-1])
    if kind == "logdet":
        return float(np.linalg.slogdet(A)[1])
    raise ValueError(f"unknown indicator {kind!r}")


@dataclass
class MullerResult:
    root: complex
    value: complex
    iterations: int
    converged: bool
    message: str = ""


def muller_find(f, guesses, tol=1e-12, max_iter=50):
    """Muller's method for a scalar holomorphic f from three distinct guesses.

    Stops when the step falls below tol*(1+|w|) or |f| == 0.  On failure the
    best iterate (smallest |f|) is returned with converged=False."""
    x0, x1, x2 = (complex(g) for g in guesses)
    if len({x0, x1, x2}) < 3:
        raise ValueError("Muller needs three distinct starting points")
    f0, f1, f2 = f(x0), f(x1), f(x2)
    best = min(((abs(v), x, v) for x, v in ((x0, f0), (x1, f1), (x2, f2))), key=lambda t: t[0])
    for it in range(1, max_iter + 1):
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(b * b - 4 * f2 * a)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            step = h2 if h2 != 0 else tol
        else:
            step = -2 * f2 / den
        x3 = x2 + step
        f3 = f(x3)
        if abs(f3) < best[0]:
            best = (abs(f3), x3, f3)
        if f3 == 0 or abs(step) <= tol * (1 + abs(x3)):
            return MullerResult(x3, f3, it, True)
        x0, x1, x2, f0, f1, f2 = x1, x2, x3, f1, f2, f3
    return MullerResult(best[1], best[2], max_iter, False, "maximum iterations reached")


def surrogate(family, size=None, seed=12345, u=None, v=None):
    """w -> 1 / (u^H A(w)^{-1} v); holomorphic with zeros at the characteristic
    values of A whenever u, v are not orthogonal to the null vectors.

    Without explicit u, v fixed random vectors are drawn from ``seed``."""
    if u is None or v is None:
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    fam = _as_family(family)

    def f(omega):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(fam(omega), check_finite=False)
        if np.any(np.diag(lu) == 0):
            return 0.0  # exactly singular: omega is a root
        den = np.vdot(u, sla.lu_solve((lu, piv), v, check_finite=False))
        return 1.0 / den if np.isfinite(den) and den != 0 else 0.0

    return f


def refine_root(family, guess, h=1e-2, tol=1e-14, max_iter=60):
    """Muller refinement near ``guess`` on the singular-vector surrogate built at ``guess``.

    Returns (root, sigma_min/sigma_max at the root, MullerResult)."""
    fam = _as_family(family)
    U, s, Vh = sla.svd(fam(guess), check_finite=False)
    f = surrogate(fam, u=U[:, -1], v=Vh[-1].conj())
    res = muller_find(f, (guess - h, guess + h, guess + 0.2 * h), tol=tol, max_iter=max_iter)
    sv = sla.svdvals(fam(res.root))
    return complex(res.root), float(sv[-1] / sv[0]), res


@dataclass
class ContourCount:
    count: float
    imag: float
    sigma_min_contour: float


def count_in_contour(family, center, radius, Q=32, fd_rel=1e-6, sigma_guard=1e-7):
    """(1/2 pi i) tr oint A^{-1} A' dw on a circle, trapezoidal in angle.

    A' uses central differences with step fd_rel*radius.  Raises
    ContourRejected if sigma_min(A) / sigma_max(A) drops below sigma_guard on the contour."""
    fam = _as_family(family)
    h = fd_rel * radius
    total = 0.0 + 0.0j
    smin = np.inf
    for q in range(Q):
        e = np.exp(2j * np.pi * q / Q)
        w = center + radius * e
        A = fam(w)
        s = sla.svdvals(A)
        smin = min(smin, s[-1] / s[0])
        if s[-1] / s[0] < sigma_guard:
            raise ContourRejected(f"sigma_min/sigma_max = {s[-1] / s[0]:.2e} at w = {w:.6g}")
        dA = (fam(w + h) - fam(w - h)) / (2 * h)
        X = sla.lu_solve(sla.lu_factor(A, check_finite=False), dA, check_finite=False)
        total += np.trace(X) * radius * e
    val = total / Q  # (1/2 pi i) * sum f(w) i r e (2 pi / Q)
    return ContourCount(float(val.real), float(val.imag), float(smin))


@dataclass
class CharacteristicValue:
    omega: complex
    multiplicity: int
    sigma_min: float
    count_residual: float
    count: float = float("nan")
    notes: list = field(default_factory=list)


@dataclass
class RootWindow:
    lo: float
    hi: float
    step: float
    radius: float = 0.02
    Q: int = 32

    def __post_init__(self):
        if self.lo < 0 or self.hi <= self.lo:
            raise ValueError("window must satisfy 0 <= lo < hi")
        if not self.step > 0:
            raise ValueError("step must be positive")


def scan_window(family, window, accept=1e-6, imag_tol=1e-6, count=True, coarse=None,
                deflate=2, stop_after=None, log=None):
    """Scan, bracket, refine and count the characteristic values in a real window.

    The grid indicator is sigma_min of ``coarse`` (defaults to ``family``; a
    cheaper low-resolution family is enough for bracketing).  Each local minimum
    seeds Muller on a surrogate built from the singular vectors of ``family`` at
    the grid point; up to ``deflate`` further roots are sought in the same bracket
    by dividing out the ones already found.  Acceptance uses sigma_min/sigma_max.
    The grid is walked upwards; with ``stop_after`` the walk ends once that many
    distinct roots are known (with ``count='svd'``, once the multiplicities add up to it).

    ``count`` selects the multiplicity: True or 'contour' for the argument-principle
    count, 'svd' for the number of relative singular values <= ``accept`` at the root
    (geometric multiplicity, one SVD), False for none."""
    if count is True:
        count = "contour"
    if count not in (False, None, "contour", "svd"):
        raise ValueError("count must be True, False, 'contour' or 'svd'")
    fam = _as_family(family)
    scan = fam if coarse is None else _as_family(coarse)
    grid = np.arange(window.lo, window.hi + 0.5 * window.step, window.step)
    grid = grid[(grid > 0) & (grid <= window.hi + 1e-12)]
    if len(grid) < 3:
        return []
    roots = []

    def rel_sigma(w):
        sv = sla.svdvals(fam(w))
        return sv[-1] / sv[0]

    def known(w):
        return any(abs(w - r.omega) < 1e-7 for r in roots)

    def refine(i):
        U, s, Vh = sla.svd(fam(grid[i]), check_finite=False)
        start = s[-1] / s[0]
        found = []
        for attempt in range(1 + deflate):
            # the k-th attempt follows the k-th smallest singular pair, so a split
            # pair of modes is seen even when the first surrogate misses the second
            base = surrogate(fam, u=U[:, -1 - attempt], v=Vh[-1 - attempt].conj())

            def f(w, found=tuple(found), base=base):
                val = base(w)
                for r in found:
                    val = val / (w - r)
                return val

            guesses = (grid[i] - 0.5 * window.step, grid[i] + 0.5 * window.step, grid[i] + 0.1 * window.step)
            res = muller_find(f, guesses, tol=1e-14, max_iter=60 if attempt == 0 else 20)
            w = complex(res.root)
            near = abs(w - grid[i]) <= 2 * window.step
            s_root = rel_sigma(w) if near else np.inf
            if attempt == 0 and s_root > start:
                # never report something worse than the bracket point
                w, s_root = complex(grid[i]), start
            if s_root > accept or abs(w.imag) > imag_tol * (1 + abs(w)):
                if log is not None and attempt == 0:
                    log.append(f"rejected minimum near {grid[i]:.6f}: sigma={s_root:.2e}, w={w:.10g}")
                break
            if any(abs(w - r) < 1e-7 for r in found):
                break
            found.append(w)
            if not known(w):
                mult = 1
                if count == "svd":
                    sv = sla.svdvals(fam(w))
                    mult = max(1, int(np.sum(sv / sv[0] <= accept)))
                roots.append(CharacteristicValue(w, mult, float(s_root), 0.0))

    sig = [scalar_indicator(scan, grid[0], "sigma"), scalar_indicator(scan, grid[1], "sigma")]
    for k in range(2, len(grid)):
        sig.append(scalar_indicator(scan, grid[k], "sigma"))
        i = k - 1
        if sig[i] <= sig[i - 1] and sig[i] < sig[i + 1]:
            refine(i)
            have = sum(r.multiplicity for r in roots) if count == "svd" else len(roots)
            if stop_after is not None and have >= stop_after:
                break
    roots.sort(key=lambda r: r.omega.real)
    if count == "contour" and roots:
        _assign_multiplicities(fam, roots, window, log, accept, imag_tol)
    return roots


def _assign_multiplicities(fam, roots, window, log=None, accept=1e-6, imag_tol=1e-6):
    """Contour counts for every root.

    A count above the number of vanishing singular values at the root means
    other roots share the contour; they are searched for, added, and the
    counts redone with radii shrunk to the new spacing."""
    for _ in range(4):
        added = False
        for k, r in enumerate(list(roots)):
            gaps = [abs(r.omega - o.omega) for j, o in enumerate(roots) if j != k]
            rad = window.radius
            r.notes = [n for n in r.notes if not n.startswith("contour")]
            if gaps and min(gaps) < 2 * rad:
                rad = 0.45 * min(gaps)
                r.notes.append(f"contour radius shrunk to {rad:.3g}")
                if rad < 1e-8:
                    r.notes.append("contour radius below 1e-8; multiplicity not counted")
                    continue
            try:
                c = count_in_contour(fam, r.omega.real, rad, window.Q)
            except ContourRejected as exc:
                r.notes.append(f"contour rejected: {exc}")
                continue
            r.count = c.count
            r.multiplicity = max(1, int(round(c.count)))
            r.count_residual = abs(c.count - round(c.count))
            if r.multiplicity > 1:
                extra = _cluster_roots(fam, r, rad, roots, accept, imag_tol)
                if extra:
                    if log is not None:
                        log.append(f"count {r.count:.3f} at {r.omega.real:.10g} resolved into "
                                   + ", ".join(f"{w.real:.10g}" for w in extra))
                    roots.extend(CharacteristicValue(w, 1, s, 0.0) for w, s in zip(extra, _rel_sigmas(fam, extra)))
                    added = True
        if not added:
            break
        roots.sort(key=lambda r: r.omega.real)


def _rel_sigmas(fam, ws):
    out = []
    for w in ws:
        sv = sla.svdvals(fam(w))
        out.append(float(sv[-1] / sv[0]))
    return out


def _cluster_roots(fam, root, rad, roots, accept, imag_tol):
    """Roots inside the contour of ``root`` that the scan missed, if any."""
    U, s, Vh = sla.svd(fam(root.omega), check_finite=False)
    geometric = int(np.sum(s / s[0] <= accept))
    missing = root.multiplicity - geometric
    if missing <= 0:
        return []
    inside = [o.omega for o in roots if abs(o.omega - root.omega) < rad]
    found = []
    for k in range(geometric, min(len(s), geometric + missing + 2)):
        base = surrogate(fam, u=U[:, -1 - k], v=Vh[-1 - k].conj())
        for sign in (-1, 1):
            known_roots = tuple(inside + found)

            def f(w, base=base, known_roots=known_roots):
                val = base(w)
                for r0 in known_roots:
                    val = val / (w - r0)
                return val

            c = root.omega.real + sign * 0.5 * rad
            res = muller_find(f, (c - 0.2 * rad, c + 0.2 * rad, c + 0.05j * rad), tol=1e-14, max_iter=40)
            w = complex(res.root)
            if abs(w - root.omega) >= rad or abs(w.imag) > imag_tol * (1 + abs(w)):
                continue
            if any(abs(w - o) < 1e-7 for o in known_roots):
                continue
            sv = sla.svdvals(fam(w))
            if sv[-1] / sv[0] <= accept:
                found.append(w)
            if len(found) >= missing:
                return found
    return found
