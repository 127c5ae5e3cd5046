"""Separable Gaussian test data with closed-form derivatives.

A bump is ``a exp(-(t-t0)^2/(2 st^2)) exp(-(x-x0)^2/(2 sx^2))`` with
``x0 >= 8 sx``, so it is below ``e^{-32}`` at the origin and is treated as
compactly supported. Its Hankel transform decays like ``exp(-z^2 sx^2/2)``.
"""

from dataclasses import dataclass
import math

import numpy as np

__all__ = ["Bump", "bump_suite", "compact_bump", "radial_bump", "rel_l2"]


@dataclass(frozen=True)
class Bump:
    x0: float
    sx: float
    t0: float = 0.0
    st: float = 0.3
    amp: float = 1.0

    def radial(self, x):
        return np.exp(-((np.asarray(x) - self.x0) ** 2) / (2 * self.sx**2))

    def radial_dx(self, x):
        x = np.asarray(x)
        return -(x - self.x0) / self.sx**2 * self.radial(x)

    def radial_dxx(self, x):
        x = np.asarray(x)
        return ((x - self.x0) ** 2 / self.sx**4 - 1 / self.sx**2) * self.radial(x)

    def temporal(self, t):
        return np.exp(-((np.asarray(t) - self.t0) ** 2) / (2 * self.st**2))

    def temporal_dt(self, t):
        t = np.asarray(t)
        return -(t - self.t0) / self.st**2 * self.temporal(t)

    def __call__(self, t, x):
        return self.amp * self.temporal(t) * self.radial(x)

    def dt(self, t, x):
        return self.amp * self.temporal_dt(t) * self.radial(x)

    def bessel_laplacian_radial(self, mu, x):
        """``(d^2/dx^2 + (1/4 - mu^2)/x^2)`` applied to the radial factor."""
        x = np.asarray(x)
        return self.radial_dxx(x) + (0.25 - mu * mu) / x**2 * self.radial(x)

    @property
    def t_extent(self):
        """Half-width in time beyond which the bump is below ``e^{-32}``."""
        return 8.0 * self.st


def compact_bump(x, a=8.0, lo=1.0, hi=2.0):
    """``exp(-a/(1-u^2))`` on ``(lo, hi)`` with ``u`` mapped to ``(-1, 1)``; zero outside.

    Returns the values and the second ``x`` derivative.
    """
    x = np.asarray(x, dtype=float)
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    u = (x - c) / h
    val = np.zeros_like(x)
    dxx = np.zeros_like(x)
    m = np.abs(u) < 1
    v = u[m]
    q = 1.0 - v * v
    e = np.exp(-a / q)
    g1 = -2.0 * a * v / q**2
    g2 = -2.0 * a / q**2 - 8.0 * a * v * v / q**3
    val[m] = e
    dxx[m] = e * (g1 * g1 + g2) / (h * h)
    return val, dxx


def radial_bump(x0=1.5, sx=0.2):
    return Bump(x0=max(x0, 8 * sx), sx=sx)


def bump_suite(n=20, seed=0, x_range=(1.5, 3.5), sx_range=(0.2, 0.4), t_range=(-1.0, 1.0), st_range=(0.25, 0.5)):
    """Fixed seeded list of ``n`` bumps with random centres and widths."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        sx = rng.uniform(*sx_range)
        x0 = max(rng.uniform(*x_range), 8 * sx)
        out.append(Bump(x0=x0, sx=sx, t0=rng.uniform(*t_range), st=rng.uniform(*st_range)))
    return out


def rel_l2(a, b, weights, dt=1.0):
    """``||a - b|| / ||b||`` in the weighted discrete ``L^2``."""
    num = np.sum(np.abs(a - b) ** 2 * weights)
    den = np.sum(np.abs(b) ** 2 * weights)
    return math.sqrt(num / den) if den > 0 else math.sqrt(num)
