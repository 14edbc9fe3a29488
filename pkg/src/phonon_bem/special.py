"""Bessel and Hankel functions of integer order 0..2 for complex argument.

Principal branch, -pi < arg z <= pi.  Ascending series are summed in double
precision for |z| <= 6 and in extended precision for 6 < |z| <= 12; beyond
that the Hankel asymptotic expansion is used.  The asymptotic series only
reaches ~2e-8 at |z| = 8, so the switch sits at 12 where the smallest term
drops below 1e-11.
"""
import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243
_SERIES_DOUBLE = 6.0
_SERIES_LONG = 12.0
_OVERFLOW = 1.0e4
_N_ASYM = 24


_GAMMA_LONG = np.longdouble("0.57721566490153286060651209008240243")
_PI_LONG = np.longdouble("3.14159265358979323846264338327950288")


def _harmonic(n, dtype=float):
    k = np.arange(1, n + 1, dtype=dtype)
    return np.concatenate((np.zeros(1, dtype=dtype), np.cumsum(1 / k)))


def _series_jy(z, nterms, dtype, drop_pole=False):
    """J0, J1, Y0, Y1 from the ascending/Neumann series.

    With ``drop_pole`` the last entry is Y1 + 2/(pi z)."""
    z = z.astype(dtype)
    w = -(z * z) / 4
    ext = dtype == np.clongdouble
    h = _harmonic(nterms + 1, np.longdouble if ext else float)
    g = _GAMMA_LONG if ext else EULER_GAMMA
    pi = _PI_LONG if ext else np.pi
    term0 = np.ones_like(z)  # w^k/(k!)^2
    term1 = np.ones_like(z)  # w^k/(k!(k+1)!)
    j0 = term0.copy()
    j1 = term1.copy()
    y0s = np.zeros_like(z)
    y1s = (h[0] + h[1] - 2 * g) * term1
    for k in range(1, nterms):
        term0 = term0 * w / (k * k)
        term1 = term1 * w / (k * (k + 1))
        j0 += term0
        j1 += term1
        y0s -= h[k] * term0
        y1s += (h[k] + h[k + 1] - 2 * g) * term1
    half = z / 2
    j1 = half * j1
    lg = np.log(half)
    y0 = (2 / pi) * ((lg + g) * j0 + y0s)
    y1 = (2 / pi) * lg * j1 - (half / pi) * y1s
    if not drop_pole:
        y1 = y1 - (2 / pi) / z
    return [a.astype(complex) for a in (j0, j1, y0, y1)]


def _asym_pq(nu, z):
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, _N_ASYM + 1):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if k % 2 == 1:
            q += (-1) ** ((k - 1) // 2) * term
        else:
            p += (-1) ** (k // 2) * term
    return p, q


def _asym_jy(z, drop_pole=False):
    out = []
    amp = np.sqrt(2.0 / (np.pi * z))
    for nu in (0, 1):
        p, q = _asym_pq(nu, z)
        chi = z - (2 * nu + 1) * np.pi / 4
        c, s = np.cos(chi), np.sin(chi)
        out.append((amp * (p * c - q * s), amp * (p * s + q * c)))
    (j0, y0), (j1, y1) = out
    if drop_pole:
        y1 = y1 + 2 / (np.pi * z)
    return j0, j1, y0, y1


def bessel_jy01(z, drop_pole=False):
    """Return J0, J1, Y0, Y1 at complex z (any shape).

    ``drop_pole`` returns Y1 + 2/(pi z) as the last entry, summed without the
    cancellation that forming it afterwards would cause for small |z|."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("Bessel Y and Hankel functions are singular at z = 0")
    if np.any(np.abs(z) > _OVERFLOW):
        raise ValueError(f"|z| exceeds the overflow guard {_OVERFLOW:g}")
    shape = z.shape
    zf = z.ravel()
    res = [np.empty_like(zf) for _ in range(4)]
    az = np.abs(zf)
    regions = [
        (az <= _SERIES_DOUBLE, lambda v: _series_jy(v, 24, complex, drop_pole)),
        ((az > _SERIES_DOUBLE) & (az <= _SERIES_LONG), lambda v: _series_jy(v, 36, np.clongdouble, drop_pole)),
        (az > _SERIES_LONG, lambda v: _asym_jy(v, drop_pole)),
    ]
    for mask, fn in regions:
        if np.any(mask):
            for r, v in zip(res, fn(zf[mask])):
                r[mask] = v
    return tuple(r.reshape(shape) for r in res)


def bessel_j01(z):
    """J0, J1 only; entire functions so z = 0 is allowed."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    j0 = np.empty_like(zf)
    j1 = np.empty_like(zf)
    az = np.abs(zf)
    small = az <= _SERIES_LONG
    if np.any(small):
        zs = zf[small]
        dtype = np.clongdouble if np.any(np.abs(zs) > _SERIES_DOUBLE) else complex
        w = -(zs.astype(dtype) ** 2) / 4
        t0 = np.ones_like(w)
        t1 = np.ones_like(w)
        a0 = t0.copy()
        a1 = t1.copy()
        for k in range(1, 36 if dtype == np.clongdouble else 24):
            t0 = t0 * w / (k * k)
            t1 = t1 * w / (k * (k + 1))
            a0 += t0
            a1 += t1
        j0[small] = a0.astype(complex)
        j1[small] = (a1 * zs.astype(dtype) / 2).astype(complex)
    if np.any(~small):
        b = _asym_jy(zf[~small])
        j0[~small] = b[0]
        j1[~small] = b[1]
    return j0.reshape(shape), j1.reshape(shape)


def hankel01(z):
    """H^(1)_0(z), H^(1)_1(z).

    For |z| > 12 the Hankel expansion is summed directly, so the value keeps full
    relative accuracy even where H decays like exp(-Im z) and J, Y grow.  Inside the
    series disk J + iY cancels by about exp(2 Im z); near the real axis, where the
    solver works, that is harmless."""
    j0, j1, y0, y1 = bessel_jy01(z)
    h0, h1 = j0 + 1j * y0, j1 + 1j * y1
    zz = np.asarray(z, dtype=complex)
    far = np.abs(zz) > _SERIES_LONG
    if np.any(far):
        v = zz[far]
        amp = np.sqrt(2.0 / (np.pi * v))
        for nu, h in ((0, h0), (1, h1)):
            p, q = _asym_pq(nu, v)
            h[far] = amp * (p + 1j * q) * np.exp(1j * (v - (2 * nu + 1) * np.pi / 4))
    return h0, h1


def hankel1(order, z):
    """Hankel function of the first kind, order 0 or 1."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    h0, h1 = hankel01(z)
    out = h0 if order == 0 else h1
    return out[()] if np.ndim(out) == 0 else out
