import numpy as np
import pytest

from besselheat import _backend, _pycore

ccore = pytest.importorskip("besselheat._ccore")


def _cloud(n=4000, seed=0):
    rng = np.random.default_rng(seed)
    s = 10 ** rng.uniform(-5, 1, n)
    x = 10 ** rng.uniform(-3, 1.5, n)
    y = x * 10 ** rng.uniform(-1, 1, n)
    return s, x, y


def test_selected_backend_reports_name():
    assert _backend.BACKEND in ("cython", "python")


@pytest.mark.parametrize("nu", [-0.9, 0.0, 0.5, 2.3, 7.0])
def test_ive_agree(nu):
    z = np.concatenate([np.geomspace(1e-8, 1e4, 500), [0.0]])
    a, b = ccore.ive(nu, z), _pycore.ive(nu, z)
    assert np.allclose(a, b, rtol=1e-13, atol=0)


@pytest.mark.parametrize("nu", [0.0, 1.0, 4.5])
def test_jv_agree(nu):
    z = np.linspace(0, 3000, 2001)
    a, b = ccore.jv(nu, z), _pycore.jv(nu, z)
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("name", ["heat_w", "kernel_k", "kernel_kt", "kernel_dxw"])
@pytest.mark.parametrize("mu", [-0.5, 0.3, 2.0])
def test_kernels_agree(name, mu):
    s, x, y = _cloud()
    a = getattr(ccore, name)(mu, s, x, y)
    b = getattr(_pycore, name)(mu, s, x, y)
    scale = np.maximum(np.abs(b), 1e-12 * np.max(np.abs(b)))
    assert np.max(np.abs(a - b) / scale) < 1e-9
