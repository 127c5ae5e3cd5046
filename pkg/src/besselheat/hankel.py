"""Discrete Hankel transform, periodic time Fourier transform and the spectral
operators built from them.

The default radial grid is self-dual: the transform variable ``z`` lives on
the same nodes as ``x``. Nodes are log-uniform near the origin and uniform
further out (see :meth:`RadialGrid.hybrid`). ``h_nu`` is a dense quadrature matrix

    H[i, j] = w_j sqrt(x_i z_j) J_nu(x_i z_j)

plus an analytic correction for ``(0, z_1)``, where transforms of order ``nu``
behave like ``c z^{nu+1/2}``. The correction uses
``int_0^a z^{nu+1} J_nu(xz) dz = a^{nu+1} J_{nu+1}(xa)/x``, and it matters
for ``nu`` close to -1, where that piece carries a sizeable share of the
integral.

Time is periodic with forward transform ``F(rho) = int e^{-i rho t} f(t) dt``,
so ``d/dt`` becomes multiplication by ``i rho``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special

from ._backend import core
from .specfun import BesselOrder

__all__ = [
    "Field",
    "GridNotCalibrated",
    "HankelPlan",
    "RadialGrid",
    "SpectralField",
    "SupportError",
    "TimeGrid",
    "hankel_matrix",
    "hankel_transform",
    "inverse_time_fourier",
    "multiplier_L",
    "multiplier_R",
    "multiplier_Rtilde",
    "op_L",
    "op_R_adjoint",
    "op_R_spectral",
    "op_Rtilde_adjoint",
    "op_Rtilde_spectral",
    "spectral_apply",
    "time_fourier",
    "transplant",
    "transplant_adjoint",
]

CALIBRATION_TOL = 1e-8

# Gregory end corrections make the log-space trapezoid rule fourth order
_GREGORY = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


class GridNotCalibrated(ValueError):
    """The radial quadrature fails its eigenfunction calibration."""


class SupportError(ValueError):
    """Input data are not supported where the discretisation requires."""


def _order(mu):
    return mu.mu if isinstance(mu, BesselOrder) else BesselOrder(mu).mu


# --- grids ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature nodes and weights on ``[x_min, x_max]``.

    Use :meth:`hybrid` for the spectral operators and :meth:`uniform` for
    the finite-difference solvers. A purely log-uniform grid
    (:meth:`log_uniform`) under-resolves ``J_nu(xz)`` when both ``x`` and ``z``
    are large, unless ``N`` is in the tens of thousands.
    """

    nodes: np.ndarray
    weights: np.ndarray
    x_min: float
    x_max: float
    kind: str = "custom"
    _calibrated: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.ndim != 1 or x.shape != w.shape or x.size < 4:
            raise ValueError("nodes and weights must be 1-D arrays of equal length >= 4")
        if not (0 < self.x_min < self.x_max < math.inf):
            raise ValueError("need 0 < x_min < x_max < inf")
        if np.any(np.diff(x) <= 0) or x[0] < self.x_min * (1 - 1e-12) or x[-1] > self.x_max * (1 + 1e-12):
            raise ValueError("nodes must increase strictly inside [x_min, x_max]")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def log_uniform(cls, N=1024, x_min=1e-3, x_max=60.0):
        v = np.linspace(math.log(x_min), math.log(x_max), N)
        h = v[1] - v[0]
        x = np.exp(v)
        c = np.ones(N)
        c[:3] = _GREGORY
        c[-3:] = _GREGORY[::-1]
        return cls(x, h * x * c, x_min, x_max, kind="log")

    @classmethod
    def hybrid(cls, N=1024, x_min=1e-3, x_max=50.0, scale=1.0):
        """Nodes ``x = scale * log(1 + e^v)`` for uniform ``v``.

        The spacing is log-uniform below ``scale`` and close to uniform above
        it, so ``J_nu(xz)`` stays resolved over the whole square
        ``[x_min, x_max]^2`` once ``N`` is of order ``x_max^2 / pi``.
        """
        v = np.linspace(math.log(math.expm1(x_min / scale)), math.log(math.expm1(x_max / scale)), N)
        h = v[1] - v[0]
        x = scale * np.logaddexp(0.0, v)
        dxdv = scale / (1.0 + np.exp(-v))
        c = np.ones(N)
        c[:3] = _GREGORY
        c[-3:] = _GREGORY[::-1]
        return cls(x, h * dxdv * c, x_min, x_max, kind="hybrid")

    @classmethod
    def uniform(cls, N, x_min, x_max):
        x = np.linspace(x_min, x_max, N)
        h = x[1] - x[0]
        c = np.ones(N)
        c[:3] = _GREGORY
        c[-3:] = _GREGORY[::-1]
        return cls(x, h * c, x_min, x_max, kind="uniform")

    @property
    def N(self):
        return self.nodes.size

    @property
    def key(self):
        return (self.kind, self.N, self.x_min, self.x_max, float(self.nodes[1]))

    def integrate(self, values, axis=-1):
        return np.tensordot(np.asarray(values), self.weights, axes=([axis], [0]))

    def calibration_error(self, mu):
        """Relative error of the rule on ``int x^{mu+1/2} e^{-x^2/2} dx``."""
        mu = float(mu)
        x = self.nodes
        approx = np.dot(self.weights, x ** (mu + 0.5) * np.exp(-0.5 * x * x))
        s = 0.5 * (mu + 1.5)
        a2, b2 = 0.5 * self.x_min**2, 0.5 * self.x_max**2
        frac = 1.0 - special.gammainc(s, a2) - special.gammaincc(s, b2)
        exact = 2.0 ** (0.5 * (mu - 0.5)) * special.gamma(s) * frac
        return abs(approx / exact - 1.0)

    def calibrate(self, mu, tol=CALIBRATION_TOL):
        """Check the calibration invariant for order ``mu``; cached."""
        mu = float(mu)
        if mu not in self._calibrated:
            self._calibrated[mu] = self.calibration_error(mu)
        err = self._calibrated[mu]
        if not err <= tol:
            raise GridNotCalibrated(
                f"radial grid reproduces the order-{mu} eigenfunction integral "
                f"to {err:.2e}, above {tol:.0e}; refine N"
            )
        return err

    def tail_nodes(self, depth, spacing=0.25):
        """Log-spaced output nodes in ``[depth, x_min)``, ordered increasingly."""
        if depth >= self.x_min:
            return np.empty(0)
        n = int(math.ceil(math.log(self.x_min / depth) / spacing))
        v = np.linspace(math.log(depth), math.log(self.x_min), n + 1)[:-1]
        return np.exp(v)


@dataclass(frozen=True)
class TimeGrid:
    """Periodic time window ``t_0 + k dt`` for ``k = 0..M-1``."""

    t0: float
    dt: float
    M: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two")

    @classmethod
    def centered(cls, T, M):
        """Window of length ``T`` centred on ``t = 0``."""
        return cls(-0.5 * T, T / M, M)

    @property
    def T(self):
        return self.M * self.dt

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.M)

    @property
    def rho(self):
        """Dual frequencies ``2 pi k/(M dt)`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.dt)

    def central_half(self):
        q = self.M // 4
        mask = np.zeros(self.M, dtype=bool)
        mask[q : self.M - q] = True
        return mask


@dataclass(eq=False)
class Field:
    """Samples ``values[k, j] = f(t_k, x_j)`` on a time and a radial grid."""

    values: np.ndarray
    tgrid: TimeGrid
    rgrid: RadialGrid

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.tgrid.M, self.rgrid.N):
            raise ValueError(f"field shape {v.shape} does not match grids ({self.tgrid.M}, {self.rgrid.N})")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        self.values = v

    @classmethod
    def from_function(cls, fn, tgrid, rgrid):
        t = tgrid.times[:, None]
        x = rgrid.nodes[None, :]
        return cls(np.asarray(fn(t, x)) * np.ones((tgrid.M, rgrid.N)), tgrid, rgrid)

    @classmethod
    def zeros(cls, tgrid, rgrid):
        return cls(np.zeros((tgrid.M, rgrid.N)), tgrid, rgrid)

    def like(self, values):
        return Field(values, self.tgrid, self.rgrid)

    def l2(self):
        """Discrete ``L^2(dt dx)`` norm."""
        return math.sqrt(self.tgrid.dt * float(self.rgrid.integrate(np.sum(np.abs(self.values) ** 2, axis=0))))

    def check_support(self, tol=1e-10):
        """Raise :class:`SupportError` unless the field lives in the central half of the window."""
        v = np.abs(self.values)
        peak = v.max()
        if peak == 0:
            return
        outside = v[~self.tgrid.central_half()]
        if outside.size and outside.max() > tol * peak:
            raise SupportError("field is not supported in the central half of the time window")


@dataclass(eq=False)
class SpectralField:
    """Values over ``(rho, x)`` or ``(rho, z)``; ``z`` shares the radial nodes."""

    values: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    domain: str = "rho-z"


# --- transforms -----------------------------------------------------------


class HankelPlan:
    """Immutable quadrature matrix of ``h_nu`` from the grid onto output nodes."""

    def __init__(self, nu, grid, out_nodes=None, calibrate=True):
        self.nu = float(nu)
        self.grid = grid
        if calibrate:
            grid.calibrate(self.nu)
        z = grid.nodes
        x = grid.nodes if out_nodes is None else np.asarray(out_nodes, dtype=float)
        self.out_nodes = x
        arg = np.ascontiguousarray(np.outer(x, z).ravel())
        J = core.jv(self.nu, arg).reshape(x.size, z.size)
        H = J * np.sqrt(np.outer(x, z)) * grid.weights[None, :]
        z0 = z[0]
        # analytic piece on (0, z0) assuming c z^{nu+1/2} behaviour below z0
        H[:, 0] += np.sqrt(z0 / x) * core.jv(self.nu + 1.0, np.ascontiguousarray(x * z0))
        H.setflags(write=False)
        self.matrix = H

    def __call__(self, g):
        return np.asarray(g) @ self.matrix.T


_PLANS = {}
_PLAN_CACHE_MAX = 24


def hankel_matrix(nu, grid, out_nodes=None):
    """Cached :class:`HankelPlan` for order ``nu`` on ``grid``."""
    okey = None if out_nodes is None else (len(out_nodes), float(out_nodes[0]), float(out_nodes[-1]))
    key = (float(nu), grid.key, okey)
    plan = _PLANS.get(key)
    if plan is None:
        if len(_PLANS) >= _PLAN_CACHE_MAX:
            _PLANS.pop(next(iter(_PLANS)))
        plan = HankelPlan(nu, grid, out_nodes)
        _PLANS[key] = plan
    return plan


def hankel_transform(mu, g, grid, out_nodes=None):
    """Discrete ``h_mu g(z) = int_0^inf sqrt(zy) J_mu(zy) g(y) dy`` along the last axis.

    Parameters
    ----------
    mu : float or BesselOrder
    g : array_like, shape (..., N)
        Samples on ``grid.nodes``.
    grid : RadialGrid
        Must pass its calibration for ``mu``.
    out_nodes : array_like, optional
        Evaluate the transform at these points instead of the grid nodes.
    """
    mu = _order(mu)
    g = np.asarray(g)
    if g.shape[-1] != grid.N:
        raise ValueError("last axis of g must match the grid")
    if not np.all(np.isfinite(g)):
        raise ValueError("samples must be finite")
    return hankel_matrix(mu, grid, out_nodes)(g)


def taper(grid, width=0.1):
    """Smooth factor that is 1 below ``(1-width) x_max`` and 0 at ``x_max``."""
    x = grid.nodes
    a = (1.0 - width) * grid.x_max
    r = np.clip((x - a) / (grid.x_max - a), 0.0, 1.0)
    return np.cos(0.5 * np.pi * r) ** 2


def time_fourier(f):
    """``F(rho_k, x) = dt sum_j e^{-i rho_k t_j} f(t_j, x)``."""
    tg = f.tgrid
    rho = tg.rho
    F = tg.dt * np.exp(-1j * rho * tg.t0)[:, None] * np.fft.fft(f.values, axis=0)
    return SpectralField(F, rho, f.rgrid.nodes, domain="rho-x")


def inverse_time_fourier(F, tgrid, rgrid):
    """Inverse of :func:`time_fourier` onto ``tgrid``."""
    rho = tgrid.rho
    vals = np.fft.ifft(np.asarray(F.values) * np.exp(1j * rho * tgrid.t0)[:, None], axis=0) / tgrid.dt
    return Field(vals, tgrid, rgrid)


# --- multipliers ----------------------------------------------------------


def multiplier_L(z, rho):
    """``1/(z^2 + i rho)``; infinite at ``(0, 0)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / (np.asarray(z) ** 2 + 1j * np.asarray(rho))


def multiplier_R(z, rho):
    """``z^2/(z^2 + i rho)``, set to 1 at ``(0, 0)``."""
    z2 = np.asarray(z, dtype=float) ** 2
    den = z2 + 1j * np.asarray(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, 1.0 + 0j, z2 / np.where(den == 0, 1.0, den))
    return out


def multiplier_Rtilde(z, rho, sign="convention"):
    """``+i rho/(z^2+i rho)`` for ``sign='convention'`` and ``-i rho/(z^2+i rho)`` for ``'flipped'``.

    With ``F(d_t f) = i rho F(f)`` only the ``'convention'`` sign equals the
    multiplier of ``d_t L``. It then satisfies ``m_R + m_Rtilde = 1``.
    """
    if sign not in ("convention", "flipped"):
        raise ValueError("sign must be 'convention' or 'flipped'")
    s = 1.0 if sign == "convention" else -1.0
    rho = np.asarray(rho, dtype=float)
    den = np.asarray(z, dtype=float) ** 2 + 1j * rho
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, 0.0j, s * 1j * rho / np.where(den == 0, 1.0, den))
    return out


# --- spectral operators ---------------------------------------------------


def spectral_apply(f, nu_in, nu_out, mult, out_nodes=None):
    """``F^{-1} h_{nu_out} [ m(z, rho) F h_{nu_in} f ]``.

    ``mult(z, rho)`` receives broadcastable arrays of shape ``(M, 1)`` and
    ``(1, N)``. With ``out_nodes`` the result is a plain ``(M, n_out)`` array of
    values at those radii; otherwise a :class:`Field` on the input grids.
    """
    tg, rg = f.tgrid, f.rgrid
    F = time_fourier(f)
    G = hankel_transform(nu_in, F.values, rg)
    G = G * mult(rg.nodes[None, :], F.rho[:, None])
    U = hankel_transform(nu_out, G, rg, out_nodes)
    if out_nodes is None:
        return inverse_time_fourier(SpectralField(U, F.rho, rg.nodes), tg, rg)
    rho = tg.rho
    return np.fft.ifft(U * np.exp(1j * rho * tg.t0)[:, None], axis=0) / tg.dt


def op_L(mu, f):
    """Spectral solution operator ``(d_t - Delta_mu)^{-1}`` on the periodic window.

    The ``rho = 0`` mode is divided by ``z^2``, which is only meaningful when
    the time mean of ``h_mu f`` vanishes fast enough at ``z = 0`` (fine for
    ``mu >= 0`` on the test data). Use a long window to control wrap-around.
    """
    mu = _order(mu)
    f.check_support()
    return spectral_apply(f, mu, mu, multiplier_L)


def op_R_spectral(mu, f, out_nodes=None):
    """``R_mu f = F^{-1} h_{mu+2} [ z^2/(z^2+i rho) F h_mu f ]``."""
    mu = _order(mu)
    f.check_support()
    return spectral_apply(f, mu, mu + 2.0, multiplier_R, out_nodes)


def op_Rtilde_spectral(mu, f, sign="convention", out_nodes=None):
    """``F^{-1} h_mu [ (+/-) i rho/(z^2+i rho) F h_mu f ]``; see :func:`multiplier_Rtilde`."""
    mu = _order(mu)
    f.check_support()
    return spectral_apply(f, mu, mu, lambda z, r: multiplier_Rtilde(z, r, sign), out_nodes)


def op_R_adjoint(mu, f, out_nodes=None):
    """``L^2`` adjoint ``h_mu [ conj(m_R) h_{mu+2} ]``."""
    mu = _order(mu)
    return spectral_apply(f, mu + 2.0, mu, lambda z, r: np.conj(multiplier_R(z, r)), out_nodes)


def op_Rtilde_adjoint(mu, f, sign="convention", out_nodes=None):
    """``L^2`` adjoint of :func:`op_Rtilde_spectral` (time-reversed operator)."""
    mu = _order(mu)
    return spectral_apply(f, mu, mu, lambda z, r: np.conj(multiplier_Rtilde(z, r, sign)), out_nodes)


def transplant(mu, g, grid):
    """``S_mu g = h_mu h_{mu+2} g`` along the last axis."""
    mu = _order(mu)
    return hankel_transform(mu, hankel_transform(mu + 2.0, g, grid), grid)


def transplant_adjoint(mu, g, grid):
    """``S_mu^* g = h_{mu+2} h_mu g``."""
    mu = _order(mu)
    return hankel_transform(mu + 2.0, hankel_transform(mu, g, grid), grid)
