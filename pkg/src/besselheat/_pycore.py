"""Vectorised NumPy implementation of the hot numerical kernels.

This module is the fallback used when the compiled ``_ccore`` extension is
not available; both expose the same functions with the same signatures and
operate on contiguous 1-D ``float64`` arrays.
"""

import numpy as np

from ._scalar import gamma

BACKEND = "python"

ASYM_TERMS = 12
J_SERIES_MAX = 12.0


def switch_point(nu):
    """Argument above which the large-z expansion of ``I_nu`` is used."""
    return max(30.0, nu * nu)


def _asym_coeffs(nu, n):
    c = np.empty(n + 1)
    c[0] = 1.0
    nu2 = 4.0 * nu * nu
    for k in range(1, n + 1):
        c[k] = c[k - 1] * (nu2 - (2 * k - 1) ** 2) / (4.0 * k)
    return c


def _ive_series(nu, z):
    # e^{-z} sum_k (z/2)^{2k+nu} / (k! Gamma(k+nu+1)), all terms positive
    out = np.empty_like(z)
    pos = z > 0
    if not np.all(pos):
        out[~pos] = 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf)
    zp = z[pos]
    if zp.size == 0:
        return out
    half = 0.5 * zp
    term = np.exp(nu * np.log(half) - zp) / gamma(nu + 1.0)
    total = term.copy()
    q = half * half
    kmax = int(zp.max()) + 60
    for k in range(kmax):
        term = term * q / ((k + 1.0) * (k + 1.0 + nu))
        total += term
        if k > 0.5 * zp.max() + 2 and np.all(term <= 1e-17 * total):
            break
    out[pos] = total
    return out


def _ive_series3(nu, z):
    # the three orders nu, nu+1, nu+2 share one pass: t1 = t0 (z/2)/(k+nu+1), etc.
    z = np.maximum(z, 1e-300)
    half = 0.5 * z
    t0 = np.exp(nu * np.log(half) - z) / gamma(nu + 1.0)
    b0 = t0.copy()
    b1 = t0 * half / (nu + 1.0)
    b2 = b1 * half / (nu + 2.0)
    q = half * half
    zmax = z.max() if z.size else 0.0
    for k in range(int(zmax) + 80):
        t0 = t0 * q / ((k + 1.0) * (k + 1.0 + nu))
        t1 = t0 * half / (k + 2.0 + nu)
        t2 = t1 * half / (k + 3.0 + nu)
        b0 += t0
        b1 += t1
        b2 += t2
        if k > 0.5 * zmax + 2 and np.all(t0 <= 1e-17 * b0):
            break
    return b0, b1, b2


def _ive_asym(nu, z):
    c = _asym_coeffs(nu, ASYM_TERMS)
    w = 1.0 / (2.0 * z)
    acc = np.zeros_like(z)
    for k in range(ASYM_TERMS, -1, -1):
        acc = acc * (-w) + c[k]
    return acc / np.sqrt(2.0 * np.pi * z)


def ive(nu, z):
    """Exponentially scaled modified Bessel function ``e^{-z} I_nu(z)``."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty_like(z)
    big = z >= switch_point(nu)
    if np.any(big):
        out[big] = _ive_asym(nu, z[big])
    if not np.all(big):
        out[~big] = _ive_series(nu, z[~big])
    return out


def ive_diffs(nu, z):
    """Return ``(a0, d01, d12)`` with ``a_j = e^{-z} I_{nu+j}(z)``.

    ``d01 = a0 - a1`` and ``d12 = a1 - a2`` are formed without cancellation
    in the large-argument branch by differencing the expansion coefficients,
    so the leading ``(2 pi z)^{-1/2}`` terms drop out exactly.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    a0 = np.empty_like(z)
    d01 = np.empty_like(z)
    d12 = np.empty_like(z)
    big = z >= switch_point(nu + 2.0)
    if np.any(big):
        zb = z[big]
        c0 = _asym_coeffs(nu, ASYM_TERMS)
        c1 = _asym_coeffs(nu + 1.0, ASYM_TERMS)
        c2 = _asym_coeffs(nu + 2.0, ASYM_TERMS)
        w = 1.0 / (2.0 * zb)
        s0 = np.zeros_like(zb)
        s01 = np.zeros_like(zb)
        s12 = np.zeros_like(zb)
        for k in range(ASYM_TERMS, -1, -1):
            s0 = s0 * (-w) + c0[k]
            s01 = s01 * (-w) + (c0[k] - c1[k])
            s12 = s12 * (-w) + (c1[k] - c2[k])
        r = 1.0 / np.sqrt(2.0 * np.pi * zb)
        a0[big] = s0 * r
        d01[big] = s01 * r
        d12[big] = s12 * r
    small = ~big
    if np.any(small):
        zs = z[small]
        b0, b1, b2 = _ive_series3(nu, zs)
        a0[small] = b0
        d01[small] = b0 - b1
        d12[small] = b1 - b2
    return a0, d01, d12


def _jv_series(nu, z):
    out = np.empty_like(z)
    pos = z > 0
    if not np.all(pos):
        out[~pos] = 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf)
    zp = z[pos]
    if zp.size == 0:
        return out
    half = 0.5 * zp
    term = np.exp(nu * np.log(half)) / gamma(nu + 1.0)
    total = term.copy()
    q = -half * half
    for k in range(200):
        term = term * q / ((k + 1.0) * (k + 1.0 + nu))
        total += term
        if k > 0.5 * zp.max() + 2 and np.all(np.abs(term) <= 1e-17 * np.abs(total) + 1e-300):
            break
    out[pos] = total
    return out


def _jv_asym(nu, z):
    # Hankel's expansion with terms [nu,k](2z)^{-k}: P takes even k, Q odd k,
    # both truncated adaptively at the smallest term.
    nterm = 60
    c = _asym_coeffs(nu, nterm)
    w = 1.0 / (2.0 * z)
    P = np.zeros_like(z)
    Q = np.zeros_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    prev = np.full_like(z, np.inf)
    for k in range(nterm + 1):
        t = c[k] * term
        at = np.abs(t)
        active &= at < prev
        if not np.any(active):
            break
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            P = np.where(active, P + sign * t, P)
        else:
            Q = np.where(active, Q + sign * t, Q)
        prev = np.where(active, at, prev)
        active &= at > 1e-17
        term = term * w
    omega = z - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (P * np.cos(omega) - Q * np.sin(omega))


def jv(nu, z):
    """Bessel function of the first kind ``J_nu(z)`` for real ``z >= 0``.

    Power series below ``z = 12`` (or while ``z <= nu``), Hankel's expansion
    once ``z >= max(12, 0.55 nu^2)``, and in between an upward three-term
    recurrence started from two low orders evaluated by the expansion.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty_like(z)
    big = z >= max(J_SERIES_MAX, 0.55 * nu * nu)
    mid = ~big & (z >= J_SERIES_MAX) & (z > nu)
    small = ~big & ~mid
    if np.any(big):
        out[big] = _jv_asym(nu, z[big])
    if np.any(mid):
        zm = z[mid]
        n = int(np.ceil(nu - 2.0))
        base = nu - n
        jm = _jv_asym(base, zm)
        jc = _jv_asym(base + 1.0, zm)
        for k in range(1, n):
            jm, jc = jc, 2.0 * (base + k) / zm * jc - jm
        out[mid] = jc if n >= 1 else jm
    if np.any(small):
        out[small] = _jv_series(nu, z[small])
    return out


# --- heat-kernel family ---------------------------------------------------
# All formulas are written with scaled Bessel values a_j = e^{-u} I_{mu+j}(u),
# u = xy/(2s); the factor e^u is folded into the Gaussian exp(-(x-y)^2/(4s)).


def heat_w(mu, s, x, y):
    u = x * y / (2.0 * s)
    return np.sqrt(x * y) / (2.0 * s) * ive(mu, u) * np.exp(-(x - y) ** 2 / (4.0 * s))


def kernel_k(mu, s, x, y):
    u = x * y / (2.0 * s)
    a0, d01, d12 = ive_diffs(mu, u)
    a1 = a0 - d01
    # x^2 a0 - 2xy a1 + y^2 a2 regrouped to avoid cancellation near x = y
    br = (x - y) ** 2 * a1 + x * x * d01 - y * y * d12
    return np.sqrt(x * y) / (2.0 * s) ** 3 * np.exp(-(x - y) ** 2 / (4.0 * s)) * br


def kernel_kt(mu, s, x, y):
    u = x * y / (2.0 * s)
    a0, d01, _ = ive_diffs(mu, u)
    # ((x^2+y^2) a0 - 2xy a1)/(4 s^2) - (mu+1) a0 / s
    br = ((x - y) ** 2 * a0 + 2.0 * x * y * d01) / (4.0 * s * s) - (mu + 1.0) * a0 / s
    return np.sqrt(x * y) / (2.0 * s) * np.exp(-(x - y) ** 2 / (4.0 * s)) * br


def kernel_dxw(mu, s, x, y):
    u = x * y / (2.0 * s)
    a0, d01, _ = ive_diffs(mu, u)
    a1 = a0 - d01
    br = (mu + 0.5) * a0 / x + ((y - x) * a1 - x * d01) / (2.0 * s)
    return np.sqrt(x * y) / (2.0 * s) * np.exp(-(x - y) ** 2 / (4.0 * s)) * br


