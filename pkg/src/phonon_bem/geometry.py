"""Smooth closed inclusion boundaries in the unit cell and their periodic meshes."""
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CLEARANCE = 0.05


class GeometryError(ValueError):
    """Invalid curve; ``field`` names the offending descriptor entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ParametricCurve:
    """Counterclockwise 2pi-periodic curve; subclasses supply derivatives 0..2."""

    kind = "curve"
    size_field = "radius"

    def derivatives(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.derivatives(np.asarray(t, dtype=float))[0]

    def check(self, clearance=DEFAULT_CLEARANCE, n_probe=4096):
        """Raise GeometryError unless the curve sits inside ]0,1[^2 with the clearance."""
        t = 2 * np.pi * np.arange(n_probe) / n_probe
        pts, d1, _ = self.derivatives(t)
        if np.min(np.hypot(d1[:, 0], d1[:, 1])) <= 0:
            raise GeometryError("curve parametrization degenerates", self.size_field)
        lo = np.min(pts)
        hi = np.max(pts)
        if lo < clearance or hi > 1 - clearance:
            raise GeometryError(
                f"{self.kind} leaves the unit cell interior with clearance {clearance}: "
                f"coordinates span [{lo:.4g}, {hi:.4g}] (check '{self.size_field}' and 'center')",
                self.size_field,
            )
        return self


@dataclass(frozen=True)
class Circle(ParametricCurve):
    center: tuple = (0.5, 0.5)
    radius: float = 0.3
    kind = "circle"
    size_field = "radius"

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("radius must be positive", "radius")

    def derivatives(self, t):
        c, s = np.cos(t), np.sin(t)
        r = self.radius
        x = np.stack([self.center[0] + r * c, self.center[1] + r * s], axis=-1)
        d1 = np.stack([-r * s, r * c], axis=-1)
        d2 = np.stack([-r * c, -r * s], axis=-1)
        return x, d1, d2

    def exact_area(self):
        return np.pi * self.radius ** 2


@dataclass(frozen=True)
class Ellipse(ParametricCurve):
    center: tuple = (0.5, 0.5)
    a: float = 0.3
    b: float = 0.2
    tilt: float = 0.0
    kind = "ellipse"
    size_field = "semi_axes"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise GeometryError("semi-axes must be positive", "semi_axes")

    def derivatives(self, t):
        c, s = np.cos(t), np.sin(t)
        rot = np.array([[np.cos(self.tilt), -np.sin(self.tilt)], [np.sin(self.tilt), np.cos(self.tilt)]])
        p0 = np.stack([self.a * c, self.b * s], axis=-1)
        p1 = np.stack([-self.a * s, self.b * c], axis=-1)
        x = np.asarray(self.center, float) + p0 @ rot.T
        return x, p1 @ rot.T, -p0 @ rot.T

    def exact_area(self):
        return np.pi * self.a * self.b


@dataclass(frozen=True)
class FourierStar(ParametricCurve):
    """r(t) = r0 (1 + sum_k a_k cos(k t) + b_k sin(k t)), k = 1, 2, ..."""

    center: tuple = (0.5, 0.5)
    r0: float = 0.25
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    kind = "star"
    size_field = "r0"

    def __post_init__(self):
        if not self.r0 > 0:
            raise GeometryError("base radius must be positive", "r0")
        t = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
        if np.min(self._radius(t)[0]) <= 0:
            raise GeometryError("Fourier coefficients make the radius non-positive", "cos_coeffs")

    def _radius(self, t):
        r = np.ones_like(t)
        dr = np.zeros_like(t)
        ddr = np.zeros_like(t)
        for k, a in enumerate(self.cos_coeffs, start=1):
            r += a * np.cos(k * t)
            dr -= a * k * np.sin(k * t)
            ddr -= a * k * k * np.cos(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            r += b * np.sin(k * t)
            dr += b * k * np.cos(k * t)
            ddr -= b * k * k * np.sin(k * t)
        return self.r0 * r, self.r0 * dr, self.r0 * ddr

    def derivatives(self, t):
        r, dr, ddr = self._radius(t)
        c, s = np.cos(t), np.sin(t)
        x = np.stack([self.center[0] + r * c, self.center[1] + r * s], axis=-1)
        d1 = np.stack([dr * c - r * s, dr * s + r * c], axis=-1)
        d2 = np.stack([(ddr - r) * c - 2 * dr * s, (ddr - r) * s + 2 * dr * c], axis=-1)
        return x, d1, d2


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Equispaced parameter nodes t_k = 2 pi k / N with analytic geometry."""

    curve: ParametricCurve
    N: int
    params: np.ndarray
    nodes: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    jacobians: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    curvature: np.ndarray = field(repr=False)

    @property
    def weights(self):
        """Trapezoidal arc-length weights (2 pi / N) |gamma'(t_k)|."""
        return (2 * np.pi / self.N) * self.jacobians

    @property
    def perimeter(self):
        return float(np.sum(self.weights))

    def integrate(self, f):
        """Trapezoidal integral of nodal values over the curve (leading axis = nodes)."""
        return np.tensordot(self.weights, f, axes=(0, 0))


def sample_mesh(curve, N, clearance=DEFAULT_CLEARANCE):
    if int(N) != N or N < 16 or N % 2:
        raise ValueError(f"N must be an even integer >= 16, got {N}")
    N = int(N)
    curve.check(clearance)
    t = 2 * np.pi * np.arange(N) / N
    x, d1, d2 = curve.derivatives(t)
    jac = np.hypot(d1[:, 0], d1[:, 1])
    tang = d1 / jac[:, None]
    normals = np.stack([tang[:, 1], -tang[:, 0]], axis=-1)
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / jac ** 3
    return BoundaryMesh(curve, N, t, x, d1, d2, jac, normals, tang, kappa)


def area_of(curve, n=512):
    """Enclosed area from (1/2) closed integral of (x dy - y dx)."""
    t = 2 * np.pi * np.arange(n) / n
    x, d1, _ = curve.derivatives(t)
    return float(0.5 * (2 * np.pi / n) * np.sum(x[:, 0] * d1[:, 1] - x[:, 1] * d1[:, 0]))


def perimeter(curve, n=512):
    t = 2 * np.pi * np.arange(n) / n
    _, d1, _ = curve.derivatives(t)
    return float((2 * np.pi / n) * np.sum(np.hypot(d1[:, 0], d1[:, 1])))


def curve_from_dict(desc):
    """Build a curve from a config mapping with a 'shape' key."""
    shape = desc.get("shape")
    center = tuple(float(v) for v in desc.get("center", (0.5, 0.5)))
    if len(center) != 2:
        raise GeometryError("center must have two coordinates", "center")
    if shape == "circle":
        return Circle(center, float(desc["radius"]))
    if shape == "ellipse":
        a, b = (float(v) for v in desc["semi_axes"])
        return Ellipse(center, a, b, float(desc.get("tilt", 0.0)))
    if shape == "star":
        return FourierStar(
            center,
            float(desc["r0"]),
            tuple(float(v) for v in desc.get("cos_coeffs", ())),
            tuple(float(v) for v in desc.get("sin_coeffs", ())),
        )
    raise GeometryError(f"unknown shape {shape!r}", "shape")
