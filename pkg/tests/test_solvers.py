import math

import numpy as np
import pytest
from scipy import integrate
from scipy.interpolate import RectBivariateSpline

from besselheat.bumps import Bump, bump_suite
from besselheat.hankel import Field, RadialGrid, SupportError, TimeGrid, op_L
from besselheat.solvers import (
    CauchyProblem,
    HypothesisWarning,
    ResolutionWarning,
    bessel_laplacian_fd,
    growth_constant,
    homogeneous_evolution,
    maximal_regularity_ratio,
    mixed_lp,
    refinement_order,
    residual_check,
    solve_cauchy,
    solve_wholespace,
    time_derivative_fd,
)


def grids(n, m, t0=-6.0, T=12.0, x_max=6.0):
    return TimeGrid(t0, T / m, m), RadialGrid.uniform(n, x_max / n, x_max)


def gaussian_flow(b, t, x, sign):
    """Heat flow of the radial Gaussian of ``b`` reflected with ``sign`` at 0."""
    v = b.sx**2 + 2 * t
    return b.sx / np.sqrt(v) * (np.exp(-((x - b.x0) ** 2) / (2 * v)) + sign * np.exp(-((x + b.x0) ** 2) / (2 * v)))


class TestWholeSpace:
    def test_zero(self):
        tg, rg = grids(32, 32)
        assert np.all(solve_wholespace(1.0, Field.zeros(tg, rg)).values == 0)

    def test_support_violation(self):
        tg, rg = grids(64, 64)
        f = Field.from_function(Bump(5.8, 0.3), tg, rg)
        with pytest.raises(SupportError):
            solve_wholespace(1.0, f)

    def test_residual(self):
        tg, rg = grids(256, 256)
        fs = [Field.from_function(b, tg, rg) for b in bump_suite(3, seed=4)]
        for u, f in zip(solve_wholespace(1.0, fs), fs):
            assert residual_check(u, f, 1.0).relative <= 5e-2

    @pytest.mark.filterwarnings("ignore::besselheat.solvers.ResolutionWarning")
    def test_neumann_reflection(self):
        # mu = -1/2: W is the Gaussian plus its mirror image
        b = Bump(x0=2.0, sx=0.3, t0=0.0, st=0.3)
        tg, rg = grids(128, 2048, t0=-3.0, T=6.0)
        u = solve_wholespace(-0.5, Field.from_function(b, tg, rg))
        for i in (1024, 1280, 1536):
            t = tg.times[i]
            for j in (32, 43, 64):
                x = rg.nodes[j]
                g = lambda tau: b.temporal(t - tau) * gaussian_flow(b, tau, x, +1)
                ref, _ = integrate.quad(g, 0, t + 8 * b.st, points=[t], limit=200, epsabs=1e-14, epsrel=1e-12)
                assert u.values[i, j] == pytest.approx(ref, rel=1e-4)

    def test_matches_spectral(self):
        b = Bump(x0=2.0, sx=0.3, t0=0.0, st=0.4)
        tg, rg = grids(256, 256)
        u = solve_wholespace(1.0, Field.from_function(b, tg, rg))
        htg = TimeGrid.centered(80.0, 1024)
        hrg = RadialGrid.hybrid(1024)
        v = op_L(1.0, Field.from_function(b, htg, hrg)).values.real
        ref = RectBivariateSpline(htg.times, hrg.nodes, v)(tg.times, rg.nodes)
        err = np.linalg.norm(u.values - ref) / np.linalg.norm(ref)
        assert err <= 5e-2

    def test_linear_and_positive(self):
        tg, rg = grids(64, 64)
        a, c = bump_suite(2, seed=7)
        fa, fc = Field.from_function(a, tg, rg), Field.from_function(c, tg, rg)
        ua, uc, us = solve_wholespace(1.0, [fa, fc, fa.like(2 * fa.values - 3 * fc.values)])
        assert np.allclose(us.values, 2 * ua.values - 3 * uc.values, atol=1e-13 * np.abs(ua.values).max())
        assert ua.values.min() >= -1e-14 * ua.values.max()

    def test_growth_bound(self):
        tg, rg = grids(128, 128)
        f = Field.from_function(Bump(2.0, 0.3), tg, rg)
        u = solve_wholespace(1.0, f)
        assert 0 < growth_constant(u, f, 1.0) < 10


class TestCauchy:
    def test_zero(self):
        tg, rg = grids(32, 32, t0=0.0)
        assert np.all(solve_cauchy(CauchyProblem(1.0, tg, rg)).values == 0)

    def test_validation(self):
        tg, rg = grids(32, 32)
        with pytest.raises(ValueError):
            CauchyProblem(1.0, tg, rg)
        tg0, _ = grids(32, 32, t0=0.0)
        with pytest.raises(ValueError):
            CauchyProblem(1.0, tg0, rg, g=np.ones(5))

    def test_dirichlet_reflection(self):
        b = Bump(x0=2.0, sx=0.3)
        tg, rg = grids(256, 64, t0=0.0, T=2.0)
        u = solve_cauchy(CauchyProblem(0.5, tg, rg, g=b.radial))
        for i in (0, 5, 40):
            ref = gaussian_flow(b, tg.times[i], rg.nodes, -1)
            # the Gaussian datum is cut at x_min, where it is ~1e-10
            assert np.allclose(u.values[i], ref, atol=1e-9)

    def test_initial_trace_order(self):
        b = Bump(x0=2.0, sx=0.3)
        rg = RadialGrid.uniform(512, 6.0 / 512, 6.0)
        g = b.radial(rg.nodes)
        ts = 0.004 * 2.0 ** -np.arange(5)
        d = homogeneous_evolution(1.0, g, rg, ts) - g
        err = np.max(np.abs(d), axis=1)
        orders = np.log2(err[:-1] / err[1:])
        # the order tends to 1 from below; the remainder after t Delta g is O(t^2)
        assert np.all(np.diff(orders) > 0) and orders[-1] >= 0.99
        rem = np.max(np.abs(d - ts[:, None] * b.bessel_laplacian_radial(1.0, rg.nodes)), axis=1) / ts**2
        assert np.ptp(rem) < 0.1 * rem.mean()

    def test_causality(self):
        tg, rg = grids(64, 64, t0=0.0, T=4.0)
        b = Bump(3.0, 0.3, t0=1.0, st=0.2)
        f = Field.from_function(b, tg, rg)
        v = f.values.copy()
        v[40:] += 0.5 * b.radial(rg.nodes)
        u1 = solve_cauchy(CauchyProblem(1.0, tg, rg, f=f))
        u2 = solve_cauchy(CauchyProblem(1.0, tg, rg, f=f.like(v)))
        assert np.array_equal(u1.values[:40], u2.values[:40]) or np.allclose(
            u1.values[:40], u2.values[:40], atol=1e-15 * np.abs(u1.values).max()
        )
        assert not np.allclose(u1.values[41:], u2.values[41:])

    def test_small_time_bound(self):
        # forced part with f switched on at t = 0 grows at most linearly
        tg, rg = grids(256, 256, t0=0.0, T=2.0)
        f = Field.from_function(lambda t, x: np.ones_like(t) * Bump(3.0, 0.3).radial(x), tg, rg)
        u = solve_cauchy(CauchyProblem(1.0, tg, rg, f=f)).values
        ratio = np.max(np.abs(u[1:20]), axis=1) / tg.times[1:20]
        assert np.all(ratio <= 1.01)

    def test_resolution_warning(self):
        tg, rg = grids(64, 256, t0=0.0, T=2.0)
        f = Field.from_function(Bump(3.0, 0.3, t0=1.0, st=0.2), tg, rg)
        with pytest.warns(ResolutionWarning):
            solve_cauchy(CauchyProblem(1.0, tg, rg, f=f))

    def test_positivity(self):
        tg, rg = grids(64, 64, t0=0.0, T=4.0)
        f = Field.from_function(Bump(3.0, 0.3, t0=1.5, st=0.3), tg, rg)
        u = solve_cauchy(CauchyProblem(2.0, tg, rg, f=f, g=Bump(3.0, 0.3).radial))
        assert u.values.min() >= -1e-14


class TestResidual:
    def test_zero(self):
        tg, rg = grids(32, 32)
        z = Field.zeros(tg, rg)
        r = residual_check(z, z, 1.0)
        assert r.interior_norm == 0 and r.boundary_layer_norm == 0

    def test_manufactured(self):
        # u = x^{mu+1/2} e^{-x^2} has Delta_mu u = (4x^2 - 4mu - 4) u
        mu = 1.5
        res = []
        for n in (64, 128, 256):
            tg, rg = grids(n, 32, x_max=5.0)
            x = rg.nodes
            phi = x ** (mu + 0.5) * np.exp(-x * x)
            U = np.tile(phi, (32, 1))
            F = -np.tile((4 * x * x - 4 * mu - 4) * phi, (32, 1))
            r = residual_check(Field(U, tg, rg), Field(F, tg, rg), mu)
            res.append(r.relative)
        assert res[-1] < 1e-3
        assert refinement_order(res[0], res[1]) > 1.8 and refinement_order(res[1], res[2]) > 1.8

    def test_stencils(self):
        rg = RadialGrid.uniform(50, 0.1, 5.0)
        x = rg.nodes
        lap = bessel_laplacian_fd(0.5, x**3, rg)
        assert np.allclose(lap, 6 * x, atol=1e-10)
        t = np.linspace(0, 1, 11)
        d = time_derivative_fd(np.tile(t**2, (3, 1)).T, 0.1, axis=0)
        assert np.allclose(d[:, 0], 2 * t, atol=1e-12)

    def test_needs_uniform(self):
        tg = TimeGrid(0.0, 0.1, 8)
        rg = RadialGrid.hybrid(32)
        z = Field.zeros(tg, rg)
        with pytest.raises(ValueError):
            residual_check(z, z, 1.0)


class TestMaximalRegularity:
    def causal(self, n):
        tg, rg = grids(n, n, t0=0.0, T=8.0)
        return [Field.from_function(b, tg, rg) for b in bump_suite(3, seed=1, t_range=(3.0, 4.0))]

    def test_zero(self):
        tg, rg = grids(32, 32, t0=0.0)
        assert maximal_regularity_ratio(1.0, 2, 2, Field.zeros(tg, rg)) == 0.0

    def test_hypothesis_flag(self):
        tg, rg = grids(32, 32, t0=0.0, T=8.0)
        f = Field.from_function(Bump(3.0, 0.3, t0=4.0), tg, rg)
        with pytest.warns(HypothesisWarning):
            r = maximal_regularity_ratio(-0.5, 2, 2, f)
        assert np.isfinite(r)
        with pytest.raises(ValueError):
            maximal_regularity_ratio(1.0, 1.0, 2, f)

    def test_stable(self):
        a = max(maximal_regularity_ratio(1.0, 2, 2, self.causal(64)))
        b = max(maximal_regularity_ratio(1.0, 2, 2, self.causal(128)))
        assert 0 < b < 10 and abs(b / a - 1) <= 0.1

    def test_mixed_lp(self):
        tg, rg = grids(40, 64, t0=0.0, T=4.0)
        a = np.exp(-tg.times)
        bx = np.exp(-rg.nodes)
        v = np.outer(a, bx)
        na = (tg.dt * np.sum(a**3)) ** (1 / 3)
        nb = (rg.weights @ bx**2) ** 0.5
        assert mixed_lp(v, tg.dt, rg.weights, 3, 2) == pytest.approx(na * nb, rel=1e-12)
