"""Principal-value realisations of the parabolic Riesz transforms.

For an output point ``(t, x)`` the truncated integral

    I(eps) = int int_{outside E_eps} k(x, x + w, s) f(t - s, x + w) dw ds

is computed by an outer Gauss-Legendre rule in the time lag ``s`` and, for
every ``s`` node, an inner rule in ``w = y - x``. The inner rule is scaled to
``sqrt(s)`` and cut at the edge of the excluded set. Three exclusion shapes
are supported:

``parabolic_full``
    ``E = {s <= eps^2, |w| <= eps}``.
``spatial_slice``
    ``E = {sqrt(s) + |w| <= eps}``.
``causal``
    ``E = {s <= eps}``, i.e. the lag is restricted to ``(eps, t)``.

Everything with ``s`` above the largest cut is shared by the whole
``eps`` sequence. Each halving only adds one dyadic shell and one small
excluded-region integral. The limit is estimated by Richardson extrapolation
on the last three iterates. The local term ``c f(t, x)`` depends on the
kernel and on the shape of ``E`` (see :func:`local_constant`).
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np

from ._backend import core
from .bumps import Bump
from .hankel import Field
from .specfun import BesselOrder, erf

__all__ = [
    "LocalConstants",
    "PVResult",
    "REGION_KINDS",
    "TruncationRegion",
    "UnreliableTruncation",
    "bold_R",
    "bold_Rtilde",
    "local_constant",
    "maximal_T_star",
    "parabolic_maximal",
    "pv_R",
    "pv_Rtilde",
    "richardson3",
    "truncated_integrals",
]

REGION_KINDS = ("parabolic_full", "spatial_slice", "causal")
_GL_ORDER = 8
_KERNEL_REACH = 14.0  # Gaussian factor is below e^{-49} beyond 14 sqrt(s)


class UnreliableTruncation(UserWarning):
    """Truncation radius below the resolution of gridded input data."""


@dataclass(frozen=True)
class TruncationRegion:
    """Excluded neighbourhood of the output point; see module docstring."""

    kind: str
    epsilon: float
    center: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"region kind must be one of {REGION_KINDS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def excludes(self, tau, y):
        """Whether ``(tau, y)`` lies in the excluded set around ``center``."""
        t, x = self.center
        s = t - np.asarray(tau, dtype=float)
        w = np.abs(np.asarray(y, dtype=float) - x)
        e = self.epsilon
        if self.kind == "parabolic_full":
            return (np.abs(s) <= e * e) & (w <= e)
        if self.kind == "spatial_slice":
            return (s >= 0) & (np.sqrt(np.abs(s)) + w <= e)
        return (s >= 0) & (s <= e)


@dataclass(frozen=True)
class LocalConstants:
    """``A = (1/sqrt(pi)) int_0^1 e^{-w^2/4} dw = erf(1/2)`` and ``1 - A``."""

    A: float
    one_minus_A: float

    @classmethod
    def compute(cls):
        A = erf(0.5)
        # 1 - A is exact in binary since A lies in [1/2, 1]
        return cls(A, 1.0 - A)


@lru_cache(maxsize=None)
def _slice_constant():
    # (1/sqrt(pi)) int_0^inf w/(1+w) e^{-w^2/4} dw on a truncated GL rule
    x, w = _composite(np.linspace(0.0, 14.0, 57), 16)
    return float(np.sum(w * x / (1 + x) * np.exp(-x * x / 4)) / math.sqrt(math.pi))


def local_constant(operator, kind):
    """Coefficient ``c`` of ``f(t, x)`` that completes the truncated limit.

    Derived from the classical kernel, which dominates at the singularity:

    =================  =================  ==================
    region             ``R`` (space)      ``Rtilde`` (time)
    =================  =================  ==================
    parabolic_full     ``-(1 - A)``       ``A``
    spatial_slice      ``-S``             ``1 - S``
    causal             ``0``              ``1``
    =================  =================  ==================

    with ``S = (1/sqrt(pi)) int_0^inf w/(1+w) e^{-w^2/4} dw ~ 0.45637``.
    In every row the time constant minus the space constant is 1, because
    ``Rtilde - R`` agrees with the identity at the singularity.
    """
    lc = LocalConstants.compute()
    if kind == "parabolic_full":
        c = -lc.one_minus_A
    elif kind == "spatial_slice":
        c = -_slice_constant()
    elif kind == "causal":
        c = 0.0
    else:
        raise ValueError(f"unknown region kind {kind!r}")
    if operator == "R":
        return c
    if operator == "Rtilde":
        return 1.0 + c
    raise ValueError("operator must be 'R' or 'Rtilde'")


# --- quadrature helpers ---------------------------------------------------


@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _composite(breaks, n=_GL_ORDER):
    b = np.unique(np.asarray(breaks, dtype=float))
    if b.size < 2:
        return np.empty(0), np.empty(0)
    gx, gw = _gl(n)
    a, c = b[:-1, None], b[1:, None]
    half = 0.5 * (c - a)
    return (0.5 * (a + c) + half * gx).ravel(), (half * gw).ravel()


def _graded(lo, hi, origin_scale, cap):
    """Breaks on ``[lo, hi]`` graded geometrically away from ``lo``.

    Panels start at width ``origin_scale/4``, double, and never exceed ``cap``.
    """
    if hi <= lo:
        return np.array([lo])
    out = [lo]
    step = max(origin_scale, 1e-300) / 4.0
    p = lo
    while p < hi:
        p = min(p + min(step, cap), hi)
        out.append(p)
        step *= 2.0
    return np.array(out)


def _w_rule(s, a, w_lo, w_hi, cap):
    """Inner rule in ``w`` at lag ``s`` excluding ``|w| < a``."""
    reach = _KERNEL_REACH * math.sqrt(s)
    lo_lim, hi_lim = max(w_lo, -reach - a), min(w_hi, reach + a)
    nodes, weights = [], []
    scale = math.sqrt(s)
    # right of the exclusion
    lo = max(a, lo_lim)
    if hi_lim > lo:
        x, w = _composite(_graded(lo, hi_lim, scale + (lo - a), cap))
        nodes.append(x)
        weights.append(w)
    # left of the exclusion, mirrored
    hi = min(-a, hi_lim)
    if hi > lo_lim:
        x, w = _composite(_graded(-hi, -lo_lim, scale + (-hi - a), cap))
        nodes.append(-x)
        weights.append(w)
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _s_rule_away(lo, hi, cap):
    # lag interval [lo, hi] with lo > 0: geometric from lo
    return _composite(_graded(lo, hi, lo, cap))


def _s_rule_toward_zero(hi, cap, depth=14):
    # lag interval (0, hi]: panels halve toward 0; the excluded integrand is flat there
    b = hi * 2.0 ** -np.arange(depth, -1, -1.0)
    b = np.concatenate([[0.0], b])
    if cap < hi:
        b = np.union1d(b, np.arange(cap, hi, cap))
    return _composite(b)


# --- input adaptation -----------------------------------------------------


@dataclass
class _Source:
    fn: object
    t_lo: float
    t_hi: float
    y_lo: float
    y_hi: float
    s_cap: float
    w_cap: float
    grid_res: tuple = None


def _as_source(f):
    if isinstance(f, _Source):
        return f
    if isinstance(f, Bump):
        return _Source(
            f, f.t0 - f.t_extent, f.t0 + f.t_extent, max(f.x0 - 8 * f.sx, 0.0), f.x0 + 8 * f.sx,
            f.st / 2.0, f.sx / 2.0,
        )
    if isinstance(f, Field):
        return _field_source(f)
    if callable(f) and hasattr(f, "support"):
        t_lo, t_hi, y_lo, y_hi = f.support
        sc = getattr(f, "scales", (0.1, 0.05))
        return _Source(f, t_lo, t_hi, y_lo, y_hi, sc[0], sc[1])
    raise TypeError("f must be a Bump, a Field, or a callable with a 'support' attribute")


def _field_source(f, tol=1e-12):
    from scipy.interpolate import RectBivariateSpline

    vals = np.asarray(f.values)
    if np.iscomplexobj(vals):
        if np.max(np.abs(vals.imag)) > 1e-12 * max(np.max(np.abs(vals.real)), 1e-300):
            raise ValueError("principal values are implemented for real fields")
        vals = vals.real
    t = f.tgrid.times
    x = f.rgrid.nodes
    spline = RectBivariateSpline(t, x, vals, kx=3, ky=3)
    big = np.abs(vals) > tol * np.max(np.abs(vals)) if np.any(vals) else np.zeros_like(vals, bool)
    if not np.any(big):
        return _Source(lambda a, b: np.zeros(np.broadcast(a, b).shape), 0.0, 0.0, 1.0, 1.0, 1.0, 1.0)
    ti, xi = np.nonzero(big)
    t_lo, t_hi = t[max(ti.min() - 1, 0)], t[min(ti.max() + 1, t.size - 1)]
    y_lo, y_hi = x[max(xi.min() - 1, 0)], x[min(xi.max() + 1, x.size - 1)]
    dx = float(np.min(np.diff(x)))

    def fn(tau, y):
        tau = np.asarray(tau, dtype=float)
        y = np.asarray(y, dtype=float)
        out = spline.ev(tau, y)
        return np.where((tau >= t[0]) & (tau <= t[-1]) & (y >= x[0]) & (y <= x[-1]), out, 0.0)

    return _Source(fn, t_lo, t_hi, y_lo, y_hi, f.tgrid.dt, dx, grid_res=(f.tgrid.dt, dx))


# --- truncated integrals --------------------------------------------------


def _kernel(operator):
    if operator == "R":
        return core.kernel_k
    if operator == "Rtilde":
        return core.kernel_kt
    raise ValueError("operator must be 'R' or 'Rtilde'")


def truncated_integrals(operator, mu, f, t, x, eps, kind):
    """Truncated integrals ``I(eps_k)`` at one output point for a decreasing ``eps``.

    Returns an array with one value per ``eps``; no local term is added.
    """
    mu = mu.mu if isinstance(mu, BesselOrder) else BesselOrder(mu).mu
    kfn = _kernel(operator)
    src = _as_source(f)
    eps = np.asarray(eps, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps sequence must be strictly decreasing")
    cuts = eps if kind == "causal" else eps**2  # lag below which exclusion applies
    s_lo = max(0.0, t - src.t_hi)
    s_hi = t - src.t_lo
    K = eps.size
    if s_hi <= 0:
        return np.zeros(K)
    w_lo, w_hi = max(src.y_lo, 0.0) - x, src.y_hi - x

    # pieces: 0 = outer (s > cuts[0]); k = 1..K-1 shells (cuts[k], cuts[k-1]);
    # K + k = excluded-region part for eps_k (s < cuts[k])
    S, W, P = [], [], []

    def add(s_nodes, s_weights, piece, a_of_s):
        for s, ws in zip(s_nodes, s_weights):
            if s <= s_lo or s > s_hi:
                continue
            wn, ww = _w_rule(s, a_of_s(s), w_lo, w_hi, src.w_cap)
            if wn.size == 0:
                continue
            S.append(np.full(wn.size, s))
            W.append(np.column_stack([wn, ws * ww]))
            P.append(np.full(wn.size, piece))

    no_excl = lambda s: 0.0
    lo = max(cuts[0], s_lo)
    if s_hi > lo:
        add(*_s_rule_away(lo, s_hi, src.s_cap), 0, no_excl)
    for k in range(1, K):
        a, b = max(cuts[k], s_lo), min(cuts[k - 1], s_hi)
        if b > a:
            add(*_s_rule_away(a, b, src.s_cap), k, no_excl)
    if kind != "causal":
        for k in range(K):
            e = eps[k]
            if kind == "parabolic_full":
                a_fn = lambda s, e=e: e
            else:
                a_fn = lambda s, e=e: max(e - math.sqrt(s), 0.0)
            add(*_s_rule_toward_zero(cuts[k], src.s_cap), K + k, a_fn)

    if not S:
        return np.zeros(K)
    s = np.concatenate(S)
    wq = np.concatenate(W)
    piece = np.concatenate(P)
    y = x + wq[:, 0]
    keep = y > 0
    s, y, wt, piece = s[keep], y[keep], wq[keep, 1], piece[keep]
    xs = np.full(s.size, float(x))
    kv = kfn(mu, np.ascontiguousarray(s), xs, np.ascontiguousarray(y))
    fv = np.asarray(src.fn(t - s, y), dtype=float)
    parts = np.bincount(piece, weights=wt * kv * fv, minlength=2 * K)
    cum = np.cumsum(parts[:K])
    if kind == "causal":
        return cum
    return cum + parts[K : 2 * K]


def richardson3(i2, i1, i0):
    """Limit of ``I(eps) = I0 + c1 eps + c2 eps^2`` from values at ``4e, 2e, e``."""
    return (8.0 * i0 - 6.0 * i1 + i2) / 3.0


@dataclass
class PVResult:
    """Principal-value evaluation at a set of output points.

    ``iterates[k, j]`` is the truncated integral at ``eps[k]`` and point ``j``
    (no local term). ``values = limit + local_constant * f``.
    """

    points: np.ndarray
    eps: np.ndarray
    iterates: np.ndarray
    limit: np.ndarray
    local_constant: float
    f_at_points: np.ndarray
    values: np.ndarray
    region: str
    operator: str
    meta: dict = field(default_factory=dict)

    def contraction_ratios(self):
        """``|I_{k-1} - I_{k-2}| / |I_k - I_{k-1}|`` per point (NaN if undefined)."""
        d = np.abs(np.diff(self.iterates, axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[:-1] / d[1:]

    def as_field_values(self, shape):
        return self.values.reshape(shape)


def _default_eps(eps0, n):
    return eps0 * 2.0 ** -np.arange(n)


def _pv(operator, mu, f, region, points, eps0, n_eps):
    if isinstance(region, TruncationRegion):
        kind = region.kind
        eps0 = region.epsilon if eps0 is None else eps0
    else:
        kind = region
    if kind not in REGION_KINDS:
        raise ValueError(f"region kind must be one of {REGION_KINDS}")
    src = _as_source(f)
    if points is None:
        if not isinstance(f, Field):
            raise ValueError("points are required unless f is a Field")
        T, X = np.meshgrid(f.tgrid.times, f.rgrid.nodes, indexing="ij")
        points = np.column_stack([T.ravel(), X.ravel()])
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if eps0 is None:
        eps0 = 0.5 * min(math.sqrt(src.s_cap * 2), src.w_cap * 2)
        if kind == "causal":
            # the lag cut has to sit below the parabolic scale squared
            eps0 = eps0 * eps0
    eps = _default_eps(eps0, n_eps)
    if src.grid_res is not None:
        dt, dx = src.grid_res
        cut = eps[-1] if kind == "causal" else eps[-1] ** 2
        if eps[-1] < dx or (kind != "causal" and cut < dt):
            warnings.warn(
                "smallest truncation is below the grid resolution of the input field",
                UnreliableTruncation,
                stacklevel=3,
            )
    it = np.empty((eps.size, points.shape[0]))
    for j, (t, x) in enumerate(points):
        it[:, j] = truncated_integrals(operator, mu, src, t, x, eps, kind)
    limit = richardson3(it[-3], it[-2], it[-1]) if eps.size >= 3 else it[-1]
    c = local_constant(operator, kind)
    fv = np.asarray(src.fn(points[:, 0], points[:, 1]), dtype=float)
    return PVResult(points, eps, it, limit, c, fv, limit + c * fv, kind, operator)


def pv_R(mu, f, region="parabolic_full", points=None, eps0=None, n_eps=6):
    """Principal-value ``R_mu f`` at ``points`` (rows ``(t, x)``).

    Parameters
    ----------
    mu : float or BesselOrder
    f : Bump, Field or callable with ``support = (t_lo, t_hi, y_lo, y_hi)``
    region : str or TruncationRegion
        Exclusion shape; a :class:`TruncationRegion` also fixes ``eps0``.
    points : array_like, shape (n, 2), optional
        Output points; defaults to every node of a Field input.
    eps0 : float, optional
        Largest truncation radius. The sequence is ``eps0 2^{-k}``.
    n_eps : int
        Number of truncation radii.

    Returns
    -------
    PVResult
    """
    return _pv("R", mu, f, region, points, eps0, n_eps)


def pv_Rtilde(mu, f, region="parabolic_full", points=None, eps0=None, n_eps=6):
    """Principal-value ``Rtilde_mu f = d_t L_mu f``; see :func:`pv_R`."""
    return _pv("Rtilde", mu, f, region, points, eps0, n_eps)


def bold_R(mu, f, epsilon, points, n_eps=1):
    """Causal truncation ``int_eps^t int_0^inf K f(t - s, y) dy ds``.

    ``f`` must vanish for negative times. With ``n_eps > 1`` the lag cut runs
    through ``epsilon 2^{-k}`` and ``limit`` holds the extrapolated value.
    """
    return _bold("R", mu, f, epsilon, points, n_eps)


def bold_Rtilde(mu, f, epsilon, points, n_eps=1):
    """Causal truncation of the time-derivative kernel; see :func:`bold_R`."""
    return _bold("Rtilde", mu, f, epsilon, points, n_eps)


def _bold(operator, mu, f, epsilon, points, n_eps):
    src = _as_source(f)
    if src.t_lo < -1e-12:
        raise ValueError("causal operators need f(tau, .) = 0 for tau < 0")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eps = _default_eps(float(epsilon), n_eps)
    it = np.empty((eps.size, points.shape[0]))
    for j, (t, x) in enumerate(points):
        if t <= eps[0] and n_eps == 1:
            it[:, j] = 0.0
            continue
        it[:, j] = truncated_integrals(operator, mu, src, t, x, eps, "causal")
    limit = richardson3(it[-3], it[-2], it[-1]) if eps.size >= 3 else it[-1]
    fv = np.asarray(src.fn(points[:, 0], points[:, 1]), dtype=float)
    return PVResult(points, eps, it, limit, 0.0, fv, limit, "causal", operator)


def maximal_T_star(mu, f, points, eps_set, operator="R"):
    """``sup_eps |I_slice(eps) - I_causal(eps^2)|`` at each point.

    The two truncations agree for lags above ``eps^2``, so the difference is
    the integral over ``{s < eps^2, sqrt(s) + |w| > eps}``. Radii with
    ``eps >= sqrt(t)`` are skipped.
    """
    src = _as_source(f)
    kfn = _kernel(operator)
    mu = mu.mu if isinstance(mu, BesselOrder) else BesselOrder(mu).mu
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eps_set = np.sort(np.asarray(eps_set, dtype=float))[::-1]
    out = np.zeros(points.shape[0])
    for j, (t, x) in enumerate(points):
        best = 0.0
        for e in eps_set:
            if not e < math.sqrt(max(t, 0.0)):
                continue
            v = _slice_cap_integral(kfn, mu, src, t, x, e)
            best = max(best, abs(v))
        out[j] = best
    return out


def _slice_cap_integral(kfn, mu, src, t, x, e):
    s_lo, s_hi = max(0.0, t - src.t_hi), min(e * e, t - src.t_lo)
    if s_hi <= s_lo:
        return 0.0
    sn, sw = _s_rule_toward_zero(e * e, src.s_cap)
    w_lo, w_hi = max(src.y_lo, 0.0) - x, src.y_hi - x
    total = 0.0
    S, Y, WT = [], [], []
    for s, ws in zip(sn, sw):
        if s <= s_lo or s > s_hi:
            continue
        wn, ww = _w_rule(s, max(e - math.sqrt(s), 0.0), w_lo, w_hi, src.w_cap)
        S.append(np.full(wn.size, s))
        Y.append(x + wn)
        WT.append(ws * ww)
    if not S:
        return 0.0
    s, y, wt = np.concatenate(S), np.concatenate(Y), np.concatenate(WT)
    keep = y > 0
    s, y, wt = s[keep], y[keep], wt[keep]
    kv = kfn(mu, np.ascontiguousarray(s), np.full(s.size, float(x)), np.ascontiguousarray(y))
    total = float(np.sum(wt * kv * src.fn(t - s, y)))
    return total


def parabolic_maximal(f, radii=None):
    """Centred maximal function ``sup_r avg_{B((t,x), r)} |f|`` on a uniform grid.

    Balls are ``{|t - s|^{1/2} + |x - y| < r}`` cut at ``x = 0`` and at the
    edges of the grid; averages divide by the measure of the cut ball.
    Radii default to a dyadic ladder from the grid scale to the grid size.
    """
    from scipy.signal import fftconvolve

    x = f.rgrid.nodes
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9):
        raise ValueError("parabolic_maximal needs a uniform radial grid")
    dx = float(dx[0])
    dt = f.tgrid.dt
    a = np.abs(np.asarray(f.values))
    ones = np.ones_like(a)
    if radii is None:
        r0 = 2.0 * max(dx, math.sqrt(dt))
        rmax = (x[-1] - x[0]) + math.sqrt(f.tgrid.T)  # parabolic diameter of the grid
        radii = r0 * 2.0 ** np.arange(0, max(1, math.ceil(math.log2(rmax / r0))) + 1)
    best = a.copy()
    floor = 1e-12 * float(a.max()) if a.size else 0.0  # FFT round-off level
    for r in radii:
        nt = int(r * r / dt)
        nx = int(r / dx)
        ti = np.arange(-nt, nt + 1)[:, None] * dt
        xi = np.arange(-nx, nx + 1)[None, :] * dx
        ball = (np.sqrt(np.abs(ti)) + np.abs(xi) < r).astype(float)
        num = np.maximum(fftconvolve(a, ball, mode="same"), 0.0)
        den = fftconvolve(ones, ball, mode="same")
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = np.where(den > 0.5, num / np.maximum(den, 1e-300), 0.0)
        best = np.maximum(best, np.where(avg > floor, avg, 0.0))
    return f.like(best)
