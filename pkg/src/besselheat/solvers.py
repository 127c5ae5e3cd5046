"""Convolution solvers for the forced Bessel heat equation.

``u_t = Delta_mu u + f`` on ``(0, inf)`` with ``Delta_mu = d^2/dx^2 + (1/4 - mu^2)/x^2``.
The forced part is the space-time convolution with the heat kernel,

    u(t, x) = int_0 int_0^inf W_tau(x, y) f(t - tau, y) dy dtau,

discretised with the midpoint rule in ``tau`` (kernel at cell centres
``(k + 1/2) dt`` against the cell average of ``f``) and the grid weights in
``y``. The sum over cells is a discrete time convolution, done by FFT for a
block of output radii at a time so that the kernel tensor is never held in
full. Several forcings on the same grids are solved in one pass.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from ._backend import core
from .hankel import Field, RadialGrid, SupportError, TimeGrid
from .specfun import BesselOrder

__all__ = [
    "CauchyProblem",
    "HypothesisWarning",
    "ResidualReport",
    "ResolutionWarning",
    "bessel_laplacian_fd",
    "growth_constant",
    "homogeneous_evolution",
    "maximal_regularity_field",
    "maximal_regularity_ratio",
    "mixed_lp",
    "refinement_order",
    "residual_check",
    "solve_cauchy",
    "solve_wholespace",
    "time_derivative_fd",
]

MARGIN = 3
_BLOCK_BYTES = 64 * 2**20


class HypothesisWarning(UserWarning):
    """Computation outside the parameter range covered by the theory."""


class ResolutionWarning(UserWarning):
    """The shortest-lag kernel is too narrow for the radial grid."""


def _order(mu):
    return mu.mu if isinstance(mu, BesselOrder) else BesselOrder(mu).mu


def _stack(f):
    """Common grids and a ``(P, M, N)`` value stack from a Field or a list of Fields."""
    fields = [f] if isinstance(f, Field) else list(f)
    if not fields:
        raise ValueError("no forcing given")
    tg, rg = fields[0].tgrid, fields[0].rgrid
    for g in fields[1:]:
        if g.tgrid != tg or g.rgrid is not rg and not np.array_equal(g.rgrid.nodes, rg.nodes):
            raise ValueError("all forcings must share the same grids")
    return tg, rg, np.stack([np.asarray(g.values) for g in fields]), isinstance(f, Field)


def _check_compact(vals, tol=1e-8, first_row=True):
    peak = np.max(np.abs(vals))
    if peak == 0:
        return
    edge = [np.abs(vals[..., :MARGIN]).max(), np.abs(vals[..., -MARGIN:]).max()]
    if first_row:
        edge.append(np.abs(vals[..., 0, :]).max())
    if max(edge) > tol * peak:
        raise SupportError("forcing must vanish at the radial edges and at the start of the window")


def _time_convolve(kernel, mu, tg, rg, vals, lag_times, cells=True):
    """``out[p, i, :] = sum_k K(lag_k)[x, y] w_y c[p, i - k, y] dt``.

    ``c[j]`` is the average ``(f_j + f_{j-1})/2`` over the cell ending at
    ``t_j`` when ``cells`` is true (midpoint rule) and ``f`` itself otherwise.
    """
    P, M, N = vals.shape
    # W at the first midpoint lag has width sqrt(dt); the y-rule needs a few nodes across it
    if math.sqrt(2.0 * lag_times[0]) < 2.0 * float(np.max(np.diff(rg.nodes))):
        warnings.warn("sqrt(dt) is below two radial spacings; refine x or coarsen t", ResolutionWarning, stacklevel=3)
    if cells:
        c = 0.5 * (vals + np.concatenate([np.zeros_like(vals[:, :1]), vals[:, :-1]], axis=1))
        c[:, 0] = 0.0  # the cell before the first sample lies outside the window
    else:
        c = vals
    cols = np.nonzero(np.any(c != 0, axis=(0, 1)))[0]
    out = np.zeros((P, M, N), dtype=np.result_type(vals, float))
    if cols.size == 0:
        return out
    y = rg.nodes[cols]
    wy = rg.weights[cols]
    L = 2 * M
    cplx = np.iscomplexobj(c)
    fft, ifft = (np.fft.fft, np.fft.ifft) if cplx else (np.fft.rfft, np.fft.irfft)
    C = fft(c[:, :, cols] * (wy * tg.dt), n=L, axis=1)  # (P, L', S)
    x = rg.nodes
    S = cols.size
    B = max(1, int(_BLOCK_BYTES // (16 * L * S)))
    lags = np.asarray(lag_times, dtype=float)
    for b0 in range(0, N, B):
        xb = x[b0 : b0 + B]
        ss = np.broadcast_to(lags[:, None, None], (M, xb.size, S)).ravel()
        xx = np.broadcast_to(xb[None, :, None], (M, xb.size, S)).ravel()
        yy = np.broadcast_to(y[None, None, :], (M, xb.size, S)).ravel()
        K = kernel(mu, np.ascontiguousarray(ss), np.ascontiguousarray(xx), np.ascontiguousarray(yy))
        Kf = fft(K.reshape(M, xb.size, S), n=L, axis=0)  # (L', b, S)
        prod = np.einsum("kbs,pks->pkb", Kf, C)
        res = ifft(prod, n=L, axis=1)[:, :M, :]
        out[:, :, b0 : b0 + xb.size] = res if cplx else res.real
    return out


def _midpoint_lags(tg):
    return (np.arange(tg.M) + 0.5) * tg.dt


def solve_wholespace(mu, f):
    """``u = int_0^inf int W_tau(x, y) f(t - tau, y) dy dtau`` on the grids of ``f``.

    Parameters
    ----------
    mu : float or BesselOrder
    f : Field or list of Field
        Forcing that vanishes at the start of the time window and near both
        radial edges. A list is solved in one pass and returns a list.

    Returns
    -------
    Field or list of Field
    """
    mu = _order(mu)
    tg, rg, vals, single = _stack(f)
    _check_compact(vals)
    u = _time_convolve(core.heat_w, mu, tg, rg, vals, _midpoint_lags(tg))
    out = [Field(v, tg, rg) for v in u]
    return out[0] if single else out


@dataclass
class CauchyProblem:
    """``u_t = Delta_mu u + f`` for ``t > 0`` with ``u(0, .) = g``.

    ``f`` (a Field or ``None``) and ``g`` (samples on ``rgrid.nodes`` or a
    callable) live on grids with ``tgrid.t0 == 0``.
    """

    mu: object
    tgrid: TimeGrid
    rgrid: RadialGrid
    f: Field = None
    g: object = None

    def __post_init__(self):
        self.mu = BesselOrder(self.mu) if not isinstance(self.mu, BesselOrder) else self.mu
        if self.tgrid.t0 != 0.0:
            raise ValueError("Cauchy problems start at t = 0 (tgrid.t0 must be 0)")
        if self.f is not None and (self.f.tgrid != self.tgrid or self.f.rgrid.N != self.rgrid.N):
            raise ValueError("forcing must live on the problem grids")
        if callable(self.g):
            self.g = np.asarray(self.g(self.rgrid.nodes), dtype=float)
        if self.g is not None:
            g = np.asarray(self.g, dtype=float)
            if g.shape != (self.rgrid.N,) or not np.all(np.isfinite(g)):
                raise ValueError("g must be finite samples on the radial nodes")
            self.g = g

    def forcing_values(self):
        return np.zeros((self.tgrid.M, self.rgrid.N)) if self.f is None else np.asarray(self.f.values)


def homogeneous_evolution(mu, g, rgrid, times):
    """``int W_t(x, y) g(y) dy`` at each ``t`` in ``times`` (``t = 0`` returns ``g``)."""
    mu = _order(mu)
    g = np.asarray(g, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty((times.size, rgrid.N))
    cols = np.nonzero(g)[0]
    x = rgrid.nodes
    for i, t in enumerate(times):
        if t == 0:
            out[i] = g
            continue
        if cols.size == 0:
            out[i] = 0.0
            continue
        xx = np.repeat(x, cols.size)
        yy = np.tile(x[cols], x.size)
        W = core.heat_w(mu, np.full(xx.size, t), xx, yy).reshape(x.size, cols.size)
        out[i] = W @ (rgrid.weights[cols] * g[cols])
    return out


def solve_cauchy(problem):
    """Forced part plus ``W_t g``; returns a Field on the problem grids."""
    p = problem
    mu = p.mu.mu
    vals = p.forcing_values()
    if p.g is not None:
        _check_compact(p.g[None, :], first_row=False)
    _check_compact(vals[None], first_row=False)
    u = _time_convolve(core.heat_w, mu, p.tgrid, p.rgrid, vals[None], _midpoint_lags(p.tgrid))[0]
    if p.g is not None and np.any(p.g):
        u = u + homogeneous_evolution(mu, p.g, p.rgrid, p.tgrid.times)
    return Field(u, p.tgrid, p.rgrid)


# --- residuals ------------------------------------------------------------


def _uniform_dx(rgrid):
    dx = np.diff(rgrid.nodes)
    if not np.allclose(dx, dx[0], rtol=1e-9):
        raise ValueError("finite-difference residuals need a uniform radial grid")
    return float(dx[0])


def bessel_laplacian_fd(mu, u, rgrid):
    """``d^2u/dx^2 + (1/4 - mu^2) u/x^2`` along the last axis.

    Centred three-point stencil inside, one-sided second-order four-point
    stencils at the two end nodes.
    """
    mu = _order(mu)
    dx = _uniform_dx(rgrid)
    u = np.asarray(u)
    d2 = np.empty_like(u)
    d2[..., 1:-1] = u[..., 2:] - 2 * u[..., 1:-1] + u[..., :-2]
    d2[..., 0] = 2 * u[..., 0] - 5 * u[..., 1] + 4 * u[..., 2] - u[..., 3]
    d2[..., -1] = 2 * u[..., -1] - 5 * u[..., -2] + 4 * u[..., -3] - u[..., -4]
    return d2 / dx**2 + (0.25 - mu * mu) * u / rgrid.nodes**2


def time_derivative_fd(u, dt, axis=-2):
    """Centred difference in time, second-order one-sided at the ends."""
    u = np.moveaxis(np.asarray(u), axis, 0)
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2 * dt)
    d[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * dt)
    d[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * dt)
    return np.moveaxis(d, 0, axis)


@dataclass
class ResidualReport:
    """Discrete ``L^2(dt dx)`` norms of ``u_t - Delta_mu u - f``.

    ``interior_norm`` drops ``MARGIN`` cells at every grid edge;
    ``boundary_layer_norm`` covers the ``MARGIN`` columns next to ``x_min``
    away from the time edges. ``f_norm`` is the interior norm of ``f``.
    """

    interior_norm: float
    boundary_layer_norm: float
    grid_spacings: tuple
    f_norm: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def relative(self):
        return self.interior_norm / self.f_norm if self.f_norm > 0 else self.interior_norm


def residual_check(u, f, mu):
    """Residual of ``u_t = Delta_mu u + f`` on the common grids of ``u`` and ``f``."""
    if u.tgrid != f.tgrid or not np.array_equal(u.rgrid.nodes, f.rgrid.nodes):
        raise ValueError("u and f must share grids")
    dt = u.tgrid.dt
    dx = _uniform_dx(u.rgrid)
    U = np.asarray(u.values)
    r = time_derivative_fd(U, dt, axis=0) - bessel_laplacian_fd(mu, U, u.rgrid) - np.asarray(f.values)
    m = MARGIN
    norm = lambda a: math.sqrt(float(np.sum(np.abs(a) ** 2)) * dt * dx)
    inner = r[m:-m, m:-m]
    layer = r[m:-m, :m]
    return ResidualReport(
        interior_norm=norm(inner),
        boundary_layer_norm=norm(layer),
        grid_spacings=(dt, dx),
        f_norm=norm(np.asarray(f.values)[m:-m, m:-m]),
    )


def refinement_order(coarse, fine, factor=2.0):
    """Observed order ``log(coarse/fine)/log(factor)``."""
    if fine <= 0:
        return math.inf
    return math.log(coarse / fine) / math.log(factor)


def growth_constant(u, f, mu):
    """Empirical ``C`` in ``|u(t, x)| <= C ||f||_inf x^{mu+1/2}``."""
    mu = _order(mu)
    fmax = np.max(np.abs(f.values))
    if fmax == 0:
        return 0.0
    return float(np.max(np.abs(u.values) / u.rgrid.nodes ** (mu + 0.5)) / fmax)


# --- maximal regularity ---------------------------------------------------


def mixed_lp(values, dt, xweights, p, q):
    """``( sum_t dt ( sum_x w |v|^q )^{p/q} )^{1/p}``: inner ``L^q`` in ``x``, outer ``L^p`` in ``t``."""
    a = np.abs(np.asarray(values))
    inner = (a**q @ xweights) ** (1.0 / q) if math.isfinite(q) else a.max(axis=-1)
    if math.isfinite(p):
        return float((dt * np.sum(inner**p, axis=-1)) ** (1.0 / p))
    return float(inner.max(axis=-1))


def maximal_regularity_ratio(mu, p, q, f):
    """``||R f||_{L^p(L^q)} / ||f||_{L^p(L^q)}`` for ``R f(t) = int_0^t d_t W_{t-s} f(s) ds``.

    ``f`` is a causal Field on a uniform radial grid. For ``mu <= -1/2``
    the value is still computed and a :class:`HypothesisWarning` is issued.
    A list of Fields gives a list of ratios.
    """
    mu = _order(mu)
    if mu <= -0.5:
        warnings.warn("maximal regularity is only asserted for mu > -1/2", HypothesisWarning, stacklevel=2)
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise ValueError("need 1 < p, q < inf")
    Rf = maximal_regularity_field(mu, f, _warn=False)
    fs = [f] if isinstance(f, Field) else list(f)
    Rs = [Rf] if isinstance(f, Field) else Rf
    out = []
    for a, b in zip(Rs, fs):
        w = b.rgrid.weights
        den = mixed_lp(b.values, b.tgrid.dt, w, p, q)
        out.append(0.0 if den == 0 else mixed_lp(a.values, b.tgrid.dt, w, p, q) / den)
    return out[0] if isinstance(f, Field) else out


def maximal_regularity_field(mu, f, _warn=True):
    """``R f(t) = int_0^t d_t W_{t-s} f(s) ds`` by midpoint quadrature in the lag."""
    mu = _order(mu)
    if _warn and mu <= -0.5:
        warnings.warn("maximal regularity is only asserted for mu > -1/2", HypothesisWarning, stacklevel=2)
    tg, rg, vals, single = _stack(f)
    _check_compact(vals, first_row=False)
    Rf = _time_convolve(core.kernel_kt, mu, tg, rg, vals, _midpoint_lags(tg))
    out = [Field(v, tg, rg) for v in Rf]
    return out[0] if single else out
