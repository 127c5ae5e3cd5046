"""Closed-form Bessel heat kernel and the kernels derived from it.

With ``u = xy/(2s)`` and scaled values ``a_j = e^{-u} I_{mu+j}(u)`` every
kernel is a polynomial in ``x, y, 1/s`` times ``a_0, a_1, a_2`` and the
Gaussian ``exp(-(x-y)^2/(4s))``. The exponential growth of ``I_mu`` is thus
cancelled analytically, and the formulas stay finite for any ``xy/s``.

Kernels with a time lag argument ``s`` are causal: they vanish for ``s <= 0``.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._backend import core
from .specfun import BesselOrder

__all__ = [
    "DiagonalProximityError",
    "Envelope",
    "ENVELOPE_KINDS",
    "KernelPoint",
    "envelope_ratio",
    "heat_kernel_bessel",
    "heat_kernel_classical",
    "kernel_K",
    "kernel_Ktilde",
    "kernel_dx_W",
    "gaussian_bound_ratio",
    "dxw_time_ratio",
]

_EPS = np.finfo(float).eps
FD_FACTOR = _EPS ** (1.0 / 3.0)
DIAGONAL_TOL = 1e-12


class DiagonalProximityError(ValueError):
    """The point is too close to the diagonal set for an envelope ratio."""


@dataclass(frozen=True)
class KernelPoint:
    """Evaluation point ``(x, y, s)`` with ``s = t - tau`` the time lag."""

    x: float
    y: float
    s: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise ValueError(f"KernelPoint needs x, y > 0, got x={self.x}, y={self.y}")

    @property
    def d(self):
        """Parabolic distance ``|s|^{1/2} + |x - y|``."""
        return math.sqrt(abs(self.s)) + abs(self.x - self.y)


@dataclass(frozen=True)
class Envelope:
    """``constant / (sqrt(s) + |x - y|)^exponent``."""

    exponent: int
    constant: float

    def __post_init__(self):
        if self.exponent not in (3, 4, 5):
            raise ValueError("envelope exponent must be 3, 4 or 5")
        if not self.constant > 0:
            raise ValueError("envelope constant must be positive")

    def __call__(self, x, y, s):
        d = np.sqrt(np.abs(s)) + np.abs(np.asarray(x) - np.asarray(y))
        return self.constant / d ** self.exponent


def _order(mu):
    # validates mu > -1 as a side effect
    return mu.mu if isinstance(mu, BesselOrder) else BesselOrder(mu).mu


def _unpack(x, y, s):
    if isinstance(x, KernelPoint):
        return x.x, x.y, x.s
    if y is None or s is None:
        raise TypeError("pass either a KernelPoint or all of x, y, s")
    return x, y, s


def _broadcast(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=np.float64) for a in args])
    shape = arrs[0].shape
    return shape, [np.ascontiguousarray(a.ravel()) for a in arrs]


def _check_space(x, y):
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise ValueError("kernel evaluation requires x > 0 and y > 0")


def _finish(out, shape):
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def _causal(fn, mu, x, y, s):
    mu = _order(mu)
    shape, (x, y, s) = _broadcast(x, y, s)
    _check_space(x, y)
    out = np.zeros_like(s)
    pos = s > 0
    if np.any(pos):
        out[pos] = fn(mu, s[pos], x[pos], y[pos])
    return _finish(out, shape)


def heat_kernel_bessel(mu, t, x, y):
    """Bessel heat kernel ``W_t^mu(x, y)``.

    ``W_t(x,y) = sqrt(xy)/(2t) I_mu(xy/2t) exp(-(x^2+y^2)/4t)``, evaluated as
    ``sqrt(xy)/(2t) [e^{-u} I_mu(u)] exp(-(x-y)^2/4t)``.

    Parameters
    ----------
    mu : float or BesselOrder
    t : float or array_like
        Time, ``t > 0``.
    x, y : float or array_like
        Positive space coordinates; all arguments broadcast.

    Returns
    -------
    float or ndarray
    """
    mu = _order(mu)
    shape, (t, x, y) = _broadcast(t, x, y)
    if np.any(~(t > 0)):
        raise ValueError("heat_kernel_bessel requires t > 0")
    _check_space(x, y)
    return _finish(core.heat_w(mu, t, x, y), shape)


def heat_kernel_classical(t, z):
    """Gaussian heat kernel ``exp(-z^2/4t)/sqrt(4 pi t)`` on the line."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("heat_kernel_classical requires t > 0")
    out = np.exp(-np.asarray(z, dtype=float) ** 2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)
    return float(out) if np.ndim(out) == 0 else out


def kernel_K(mu, x, y=None, s=None):
    """``delta_{mu+1} delta_mu W_s^mu(x, y)`` for ``s > 0`` and 0 otherwise.

    The closed form is ``sqrt(xy)/(2s)^3 G [x^2 a0 - 2xy a1 + y^2 a2]``, computed
    as ``(x-y)^2 a1 + x^2 (a0-a1) - y^2 (a1-a2)`` so that nothing cancels on
    the diagonal. ``x`` may be a :class:`KernelPoint`.
    """
    x, y, s = _unpack(x, y, s)
    return _causal(core.kernel_k, mu, x, y, s)


def kernel_Ktilde(mu, x, y=None, s=None):
    """Time derivative ``d/ds W_s^mu(x, y)`` for ``s > 0`` and 0 otherwise."""
    x, y, s = _unpack(x, y, s)
    return _causal(core.kernel_kt, mu, x, y, s)


def kernel_dx_W(mu, x, y=None, s=None):
    """Space derivative ``d/dx W_s^mu(x, y)`` for ``s > 0`` and 0 otherwise."""
    x, y, s = _unpack(x, y, s)
    return _causal(core.kernel_dxw, mu, x, y, s)


# --- envelope ratios ------------------------------------------------------

ENVELOPE_KINDS = {"size3": 3, "grad_x4": 4, "grad_y4": 4, "dt5": 5}


def _kernel_fn(kernel):
    if kernel == "K":
        return core.kernel_k
    if kernel == "Ktilde":
        return core.kernel_kt
    raise ValueError(f"kernel must be 'K' or 'Ktilde', got {kernel!r}")


def envelope_ratio(kind, mu, x, y=None, s=None, kernel="K"):
    """Kernel quantity times the matching power of the parabolic distance.

    ``size3`` gives ``|k| d^3``, ``grad_x4`` and ``grad_y4`` give ``|d_x k| d^4``
    and ``|d_y k| d^4``, and ``dt5`` gives ``|d_s k| d^5``, with
    ``d = sqrt(s) + |x - y|`` and ``k`` either ``K`` or ``Ktilde``. Derivatives
    are centred differences with step ``eps^{1/3}`` times the local length
    scale (``min(x, y, d)`` in space, ``s`` in time).

    Returns 0 where ``s <= 0``. Raises :class:`DiagonalProximityError` when
    ``d < 1e-12``.
    """
    if kind not in ENVELOPE_KINDS:
        raise ValueError(f"unknown envelope kind {kind!r}")
    fn = _kernel_fn(kernel)
    x, y, s = _unpack(x, y, s)
    mu = _order(mu)
    shape, (x, y, s) = _broadcast(x, y, s)
    _check_space(x, y)
    out = np.zeros_like(s)
    pos = s > 0
    if not np.any(pos):
        return _finish(out, shape)
    xs, ys, ss = x[pos], y[pos], s[pos]
    d = np.sqrt(ss) + np.abs(xs - ys)
    if np.any(d < DIAGONAL_TOL):
        raise DiagonalProximityError("sqrt(s) + |x - y| below 1e-12")
    expo = ENVELOPE_KINDS[kind]
    if kind == "size3":
        q = fn(mu, ss, xs, ys)
    elif kind == "dt5":
        h = FD_FACTOR * ss
        q = (fn(mu, ss + h, xs, ys) - fn(mu, ss - h, xs, ys)) / (2.0 * h)
    else:
        h = FD_FACTOR * np.minimum(np.minimum(xs, ys), d)
        if kind == "grad_x4":
            q = (fn(mu, ss, xs + h, ys) - fn(mu, ss, xs - h, ys)) / (2.0 * h)
        else:
            q = (fn(mu, ss, xs, ys + h) - fn(mu, ss, xs, ys - h)) / (2.0 * h)
    out[pos] = np.abs(q) * d ** expo
    return _finish(out, shape)


def gaussian_bound_ratio(mu, tau, x, y, c=0.25):
    """Ratio of ``W_tau`` to ``(1 + (xy/tau)^{mu+1/2}) exp(-c (x-y)^2/tau) / sqrt(tau)``.

    With ``c = 1/4`` the ratio stays bounded. Any rate ``c > 1/4`` fails on
    the diagonal band, where ``W`` decays only like ``exp(-(x-y)^2/4tau)``.
    The ratio is assembled in log form so large exponents do not overflow
    before they cancel.
    """
    mu = _order(mu)
    shape, (tau, x, y) = _broadcast(tau, x, y)
    u = x * y / (2.0 * tau)
    a0 = core.ive(mu, np.ascontiguousarray(u))
    with np.errstate(over="ignore"):
        log_poly = np.logaddexp(0.0, (mu + 0.5) * np.log(x * y / tau))
        log_r = (
            0.5 * np.log(x * y / tau) - math.log(2.0) + np.log(a0)
            + (c - 0.25) * (x - y) ** 2 / tau - log_poly
        )
        out = np.exp(log_r)
    return _finish(out, shape)


def dxw_time_ratio(mu, x, y, s, c=0.25):
    """``|d_s d_x W_s(x,y)| s^2 exp(c (x-y)^2/s)``, bounded for small ``c``."""
    mu = _order(mu)
    shape, (x, y, s) = _broadcast(x, y, s)
    _check_space(x, y)
    h = FD_FACTOR * s
    q = (core.kernel_dxw(mu, s + h, x, y) - core.kernel_dxw(mu, s - h, x, y)) / (2.0 * h)
    with np.errstate(over="ignore"):
        out = np.abs(q) * s * s * np.exp(c * (x - y) ** 2 / s)
    return _finish(out, shape)
