"""Special functions: Gamma, erf, J_nu and exponentially scaled I_nu.

``I_nu`` is summed from its power series below ``z* = max(30, nu^2)`` and
from the 12-term large-argument expansion with coefficients ``[nu, k]`` above
it. Kernel code only ever needs ``e^{-z} I_nu(z)``, so that is what is
exposed; the exponential is folded into Gaussian factors by the callers.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from . import _scalar
from ._backend import core

__all__ = [
    "AccuracyWarning",
    "AsymptoticCoeff",
    "BesselOrder",
    "J_RELIABLE_MAX",
    "asymptotic_coeff",
    "bessel_i_scaled",
    "bessel_j",
    "erf",
    "gamma",
    "regime_switch",
]

J_RELIABLE_MAX = 1e4


class AccuracyWarning(UserWarning):
    """Raised when an evaluation leaves its validated accuracy range."""


@dataclass(frozen=True)
class BesselOrder:
    """Order ``mu > -1`` of the Bessel operator with its classification flags.

    Parameters
    ----------
    mu : float
        The order. Construction fails unless ``mu > -1``.
    """

    mu: float
    is_neumann: bool = field(init=False)
    is_dirichlet: bool = field(init=False)
    cz_class: bool = field(init=False)

    def __post_init__(self):
        mu = float(self.mu)
        if not mu > -1.0 or not math.isfinite(mu):
            raise ValueError(f"Bessel order must satisfy mu > -1, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "is_neumann", mu == -0.5)
        object.__setattr__(self, "is_dirichlet", mu == 0.5)
        # kernels are standard Calderon-Zygmund kernels in this range
        object.__setattr__(self, "cz_class", mu > 0.5 or mu == -0.5)

    def rtilde_bounded(self, p):
        """Whether the time-derivative Riesz transform is bounded on ``L^p``."""
        if not 1.0 < p < math.inf:
            return False
        if self.mu > -0.5:
            return True
        return -self.mu - 0.5 < 1.0 / p < self.mu + 1.5

    def r_bounded(self, p):
        """Whether the second-order spatial Riesz transform is bounded on ``L^p``."""
        if not 1.0 < p < math.inf:
            return False
        if self.mu > -0.5:
            return True
        return 1.0 / p < self.mu + 1.5

    def __float__(self):
        return self.mu


def _order(mu):
    return mu.mu if isinstance(mu, BesselOrder) else float(mu)


def gamma(x):
    """Gamma function on ``(0, 171.62)``; see :func:`besselheat._scalar.gamma`."""
    return _scalar.gamma(x)


def erf(x):
    """Error function; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        return _scalar.erf(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_scalar.erf(v) for v in arr.ravel()]).reshape(arr.shape)


def asymptotic_coeff(nu, k):
    """Coefficient ``[nu, k]`` of the large-argument expansion of ``I_nu``."""
    return _scalar.asymptotic_coeff(nu, k)


@dataclass(frozen=True)
class AsymptoticCoeff:
    nu: float
    k: int
    value: float

    @classmethod
    def of(cls, nu, k):
        return cls(float(nu), int(k), asymptotic_coeff(nu, k))


def regime_switch(nu):
    """Argument where :func:`bessel_i_scaled` changes from series to expansion."""
    return core.switch_point(float(nu))


def _prep(nu, z, name):
    nu = _order(nu)
    if not nu > -1.0:
        raise ValueError(f"{name} requires nu > -1, got {nu}")
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr < 0) or np.any(np.isnan(z_arr)):
        raise ValueError(f"{name} requires z >= 0")
    return nu, z_arr


def bessel_i_scaled(nu, z):
    """Exponentially scaled modified Bessel function ``e^{-z} I_nu(z)``.

    Parameters
    ----------
    nu : float or BesselOrder
        Order, ``nu > -1``.
    z : float or array_like
        Nonnegative argument(s).

    Returns
    -------
    float or ndarray
        Same shape as ``z``.
    """
    nu, z_arr = _prep(nu, z, "bessel_i_scaled")
    out = core.ive(nu, z_arr.ravel()).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_j(nu, z):
    """Bessel function of the first kind ``J_nu(z)`` for ``z >= 0``.

    Accuracy is validated to 1e-10 relative to ``max(|J_nu|, sqrt(2/(pi z)))``
    for ``z <= 1e4``; beyond that an :class:`AccuracyWarning` is issued since
    the phase ``z - nu pi/2 - pi/4`` loses absolute precision.
    """
    nu, z_arr = _prep(nu, z, "bessel_j")
    if np.any(z_arr > J_RELIABLE_MAX):
        warnings.warn(
            f"bessel_j evaluated above z = {J_RELIABLE_MAX:g}; phase accuracy degrades",
            AccuracyWarning,
            stacklevel=2,
        )
    out = core.jv(nu, z_arr.ravel()).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out
