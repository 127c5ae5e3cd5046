import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from besselheat.kernels import (
    DiagonalProximityError,
    Envelope,
    KernelPoint,
    dxw_time_ratio,
    envelope_ratio,
    gaussian_bound_ratio,
    heat_kernel_bessel,
    heat_kernel_classical,
    kernel_K,
    kernel_Ktilde,
    kernel_dx_W,
)
from besselheat.specfun import BesselOrder


def neumann_ref(t, x, y):
    return heat_kernel_classical(t, x - y) + heat_kernel_classical(t, x + y)


def dirichlet_ref(t, x, y):
    # W_t(x-y) - W_t(x+y) with the difference formed through expm1
    return np.exp(-(x - y) ** 2 / (4 * t)) * (-np.expm1(-x * y / t)) / np.sqrt(4 * np.pi * t)


def fd_delta(nu, f, h):
    # x^{nu+1/2} d/dx x^{-nu-1/2} f, centred
    return lambda x: x ** (nu + 0.5) * (
        f(x + h) * (x + h) ** (-nu - 0.5) - f(x - h) * (x - h) ** (-nu - 0.5)
    ) / (2 * h)


class TestHeatKernel:
    def test_reductions(self):
        rng = np.random.default_rng(1)
        t = 10 ** rng.uniform(-3, 1, 500)
        x = 10 ** rng.uniform(-2, 1, 500)
        y = 10 ** rng.uniform(-2, 1, 500)
        for mu, ref in ((-0.5, neumann_ref), (0.5, dirichlet_ref)):
            w = heat_kernel_bessel(mu, t, x, y)
            r = ref(t, x, y)
            m = r > 1e-300
            assert np.max(np.abs(w[m] / r[m] - 1)) < 1e-12

    def test_symmetric_exact(self):
        rng = np.random.default_rng(2)
        x, y = rng.uniform(0.01, 5, (2, 200))
        assert np.array_equal(heat_kernel_bessel(1.3, 0.2, x, y), heat_kernel_bessel(1.3, 0.2, y, x))

    def test_mass_identity(self):
        mu, tau, x = 0.7, 0.3, 1.4
        val, _ = integrate.quad(
            lambda y: heat_kernel_bessel(mu, tau, x, y) * y ** (mu + 0.5), 0, 30, epsabs=0, epsrel=1e-12, limit=200
        )
        assert val == pytest.approx(x ** (mu + 0.5), rel=1e-8)

    def test_chapman_kolmogorov(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            mu = rng.uniform(-0.9, 3)
            t, s = rng.uniform(0.05, 1.0, 2)
            x, y = rng.uniform(0.1, 3.0, 2)
            f = lambda z: heat_kernel_bessel(mu, t, x, z) * heat_kernel_bessel(mu, s, z, y)
            val, _ = integrate.quad(f, 0, 40, epsabs=0, epsrel=1e-11, limit=400, points=[x, y])
            assert val == pytest.approx(heat_kernel_bessel(mu, t + s, x, y), rel=1e-7)

    @pytest.mark.parametrize("mu, tau, x, y", [(0.0, 0.5, 1.0, 1.5), (1.7, 0.3, 0.8, 1.1), (-0.6, 1.0, 0.4, 2.0)])
    def test_product_formula(self, mu, tau, x, y):
        # independent oracle: scipy's J_nu
        f = lambda z: math.exp(-z * z * tau) * math.sqrt(x * z) * special.jv(mu, x * z) * math.sqrt(y * z) * special.jv(mu, y * z)
        val, _ = integrate.quad(f, 0, 12 / math.sqrt(tau), limit=400, epsabs=0, epsrel=1e-10)
        assert val == pytest.approx(heat_kernel_bessel(mu, tau, x, y), rel=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(
        mu=st.floats(-0.99, 6.0),
        t=st.floats(1e-4, 1e3),
        x=st.floats(1e-4, 1e2),
        y=st.floats(1e-4, 1e2),
    )
    def test_nonnegative_finite(self, mu, t, x, y):
        w = heat_kernel_bessel(mu, t, x, y)
        assert w >= 0 and math.isfinite(w)

    def test_rejects(self):
        with pytest.raises(ValueError):
            heat_kernel_bessel(1.0, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel_bessel(1.0, 1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel_bessel(-1.0, 1.0, 1.0, 1.0)

    def test_accepts_order_object(self):
        assert heat_kernel_bessel(BesselOrder(0.5), 1.0, 1.0, 2.0) == heat_kernel_bessel(0.5, 1.0, 1.0, 2.0)


class TestClassical:
    def test_values(self):
        assert heat_kernel_classical(0.3, 0.0) == pytest.approx(1 / math.sqrt(4 * math.pi * 0.3))
        assert heat_kernel_classical(1.0, 2.0) == pytest.approx(math.exp(-1) / math.sqrt(4 * math.pi))

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_unit_mass(self, t):
        val, _ = integrate.quad(lambda z: heat_kernel_classical(t, z), -np.inf, np.inf, epsabs=0, epsrel=1e-12)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_even(self):
        assert heat_kernel_classical(0.7, 1.3) == heat_kernel_classical(0.7, -1.3)


class TestDerivedKernels:
    def test_K_matches_fd(self):
        mu, x, y, s, h = 1.0, 1.0, 1.1, 0.05, 1e-4
        w = lambda xx: heat_kernel_bessel(mu, s, xx, y)
        ref = fd_delta(mu + 1, fd_delta(mu, w, h), h)(x)
        assert kernel_K(mu, x, y, s) == pytest.approx(ref, rel=1e-5)

    @pytest.mark.parametrize("mu", [-0.5, 0.2, 2.5])
    def test_K_matches_fd_more_orders(self, mu):
        x, y, s, h = 0.9, 1.3, 0.2, 1e-4
        w = lambda xx: heat_kernel_bessel(mu, s, xx, y)
        ref = fd_delta(mu + 1, fd_delta(mu, w, h), h)(x)
        assert kernel_K(mu, x, y, s) == pytest.approx(ref, rel=1e-5)

    def test_K_causal_and_limit(self):
        assert kernel_K(1.0, 1.0, 1.2, 0.0) == 0.0
        assert kernel_K(1.0, KernelPoint(1.0, 1.2, -0.3)) == 0.0
        vals = kernel_K(1.0, 1.0, 3.0, np.array([1e-2, 1e-3, 1e-4]))
        assert abs(vals[-1]) < 1e-300 < abs(vals[0])

    def test_K_three_term_form(self):
        # x^2 a0 - 2xy a1 + y^2 a2 evaluated directly with mpmath-free scipy ive
        mu, x, y, s = 1.4, 0.7, 1.9, 0.4
        u = x * y / (2 * s)
        a = [special.ive(mu + j, u) for j in range(3)]
        ref = math.sqrt(x * y) / (2 * s) ** 3 * math.exp(-(x - y) ** 2 / (4 * s)) * (
            x * x * a[0] - 2 * x * y * a[1] + y * y * a[2]
        )
        assert kernel_K(mu, x, y, s) == pytest.approx(ref, rel=1e-12)

    def test_Ktilde_matches_fd(self):
        mu, x, y, s, h = 0.7, 1.2, 0.9, 0.2, 1e-5
        ref = (heat_kernel_bessel(mu, s + h, x, y) - heat_kernel_bessel(mu, s - h, x, y)) / (2 * h)
        assert kernel_Ktilde(mu, x, y, s) == pytest.approx(ref, rel=1e-5)

    def test_heat_equation(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            mu = rng.uniform(-0.9, 3.0)
            x, y = rng.uniform(0.3, 3.0, 2)
            s = rng.uniform(0.05, 1.0)
            h = 1e-3 * min(x, math.sqrt(s))
            w = lambda xx: heat_kernel_bessel(mu, s, xx, y)
            # fourth-order centred second derivative
            d2 = (-w(x + 2 * h) + 16 * w(x + h) - 30 * w(x) + 16 * w(x - h) - w(x - 2 * h)) / (12 * h * h)
            lap = d2 + (0.25 - mu * mu) / x**2 * w(x)
            kt = kernel_Ktilde(mu, x, y, s)
            assert abs(kt - lap) <= 1e-5 * abs(kt) + 1e-9

    def test_Ktilde_causal(self):
        assert kernel_Ktilde(0.3, 1.0, 2.0, -1.0) == 0.0

    def test_dxW_neumann(self):
        x, y, s = 1.0, 2.0, 0.3
        g = lambda z: -z / (2 * s) * heat_kernel_classical(s, z)
        assert kernel_dx_W(-0.5, x, y, s) == pytest.approx(g(x - y) + g(x + y), rel=1e-12)

    def test_dxW_fd(self):
        h = 1e-5
        ref = (heat_kernel_bessel(2, 0.1, 0.5 + h, 0.6) - heat_kernel_bessel(2, 0.1, 0.5 - h, 0.6)) / (2 * h)
        assert kernel_dx_W(2.0, 0.5, 0.6, 0.1) == pytest.approx(ref, rel=1e-5)

    def test_dxW_symmetry(self):
        # d_x W(x, y) equals the derivative in the second slot of W(y, x)
        mu, x, y, s, h = 1.2, 0.8, 1.5, 0.25, 1e-5
        dy_swapped = (heat_kernel_bessel(mu, s, y, x + h) - heat_kernel_bessel(mu, s, y, x - h)) / (2 * h)
        assert kernel_dx_W(mu, x, y, s) == pytest.approx(dy_swapped, rel=1e-6)

    def test_large_argument_no_overflow(self):
        vals = kernel_K(1.0, 50.0, np.array([50.0, 50.01, 49.9]), 1e-4)
        assert np.all(np.isfinite(vals))
        # far from the origin K looks like the second derivative of the Gaussian
        s = 1e-6
        assert kernel_K(3.0, 200.0, 200.0, s) == pytest.approx(-1 / (2 * s * math.sqrt(4 * math.pi * s)), rel=1e-3)


class TestEnvelope:
    def test_kernel_point(self):
        p = KernelPoint(1.0, 1.5, 0.04)
        assert p.d == pytest.approx(0.7)
        with pytest.raises(ValueError):
            KernelPoint(0.0, 1.0, 1.0)

    def test_envelope_value(self):
        e = Envelope(4, 2.0)
        assert e(1.0, 1.5, 0.25) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            Envelope(2, 1.0)

    def test_size_ratio(self):
        r = envelope_ratio("size3", -0.5, 1.0, 1.2, 0.01)
        assert 0 < r < np.inf

    def test_dt5_diagonal_bounded(self):
        vals = [envelope_ratio("dt5", 1.0, 2.0, 2.0, s) for s in (1e-3, 1e-4, 1e-5, 1e-6)]
        assert np.all(np.isfinite(vals))
        assert max(vals) / min(vals) < 1.1

    def test_causal_zero(self):
        assert envelope_ratio("size3", 0.3, 1.0, 2.0, -0.1) == 0.0

    def test_diagonal_guard(self):
        with pytest.raises(DiagonalProximityError):
            envelope_ratio("grad_x4", 1.0, 1.0, 1.0, 1e-30)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            envelope_ratio("size9", 1.0, 1.0, 2.0, 0.1)

    def test_grad_fd_accuracy(self):
        # the centred difference agrees with a Richardson-refined one
        mu, x, y, s = 1.0, 1.0, 1.3, 0.02
        d = math.sqrt(s) + 0.3
        r = envelope_ratio("grad_x4", mu, x, y, s)
        h = 1e-3
        k = lambda xx: kernel_K(mu, xx, y, s)
        d1 = (k(x + h) - k(x - h)) / (2 * h)
        d2 = (k(x + h / 2) - k(x - h / 2)) / h
        ref = abs((4 * d2 - d1) / 3) * d**4
        assert r == pytest.approx(ref, rel=1e-6)

    def test_gaussian_rate(self):
        # W decays like exp(-(x-y)^2/4s): rate 1/4 keeps the ratio bounded, rate 1 does not
        taus = np.geomspace(1e-2, 1e-5, 4)
        quarter = gaussian_bound_ratio(1.0, taus, 1.0 + 10 * np.sqrt(taus), 1.0)
        one = gaussian_bound_ratio(1.0, taus, 1.0 + 10 * np.sqrt(taus), 1.0, c=1.0)
        assert np.all(quarter < 1.0)
        assert np.all(one > 1e20)

    def test_dxw_time_ratio_bounded(self):
        s = np.geomspace(1e-6, 1.0, 30)
        r = dxw_time_ratio(1.0, 1.0, 1.0 + np.sqrt(s), s, c=0.1)
        assert np.all(np.isfinite(r)) and r.max() < 10
