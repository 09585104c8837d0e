import subprocess
import sys

import numpy as np
import pytest

from poisonlab import backends


def _cython_available():
    try:
        backends.get_backend("cython")
        return True
    except ImportError:
        return False


requires_cython = pytest.mark.skipif(
    not _cython_available(), reason="compiled extension not built"
)


class TestSelection:
    def test_active_backend_is_known(self):
        assert backends.active_name in ("numpy", "cython")

    def test_get_backend_unknown_name(self):
        with pytest.raises(ValueError, match="unknown backend"):
            backends.get_backend("fortran")

    def test_env_var_selects_numpy(self):
        out = subprocess.run(
            [sys.executable, "-c",
             "from poisonlab import backends; print(backends.active_name)"],
            env={"POISONLAB_BACKEND": "numpy", "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True,
        )
        assert out.stdout.strip() == "numpy"

    def test_env_var_rejects_garbage(self):
        out = subprocess.run(
            [sys.executable, "-c", "import poisonlab.backends"],
            env={"POISONLAB_BACKEND": "gpu", "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True,
        )
        assert out.returncode != 0
        assert "POISONLAB_BACKEND" in out.stderr


@requires_cython
class TestAgreement:
    """The compiled kernels must match the numpy fallback numerically."""

    def _backends(self):
        return backends.get_backend("numpy"), backends.get_backend("cython")

    def test_bandwidth(self):
        np_be, cy_be = self._backends()
        rng = np.random.default_rng(0)
        for _ in range(10):
            bank = rng.normal(size=(int(rng.integers(2, 30)), int(rng.integers(1, 8))))
            a = np_be.mean_pairwise_distance(bank)
            b = cy_be.mean_pairwise_distance(bank)
            assert abs(a - b) <= 1e-12 * max(a, 1.0)
            a = np_be.mean_pairwise_squared_distance(bank)
            b = cy_be.mean_pairwise_squared_distance(bank)
            assert abs(a - b) <= 1e-12 * max(a, 1.0)

    def test_likelihood_and_gradient(self):
        np_be, cy_be = self._backends()
        rng = np.random.default_rng(1)
        for _ in range(20):
            d = int(rng.integers(1, 10))
            bank = rng.normal(size=(int(rng.integers(2, 25)), d))
            x = rng.normal(size=d)
            h = np_be.mean_pairwise_distance(bank)
            assert abs(np_be.kde_likelihood(bank, h, x)
                       - cy_be.kde_likelihood(bank, h, x)) < 1e-14
            p_np, g_np = np_be.kde_likelihood_grad(bank, h, x)
            p_cy, g_cy = cy_be.kde_likelihood_grad(bank, h, x)
            assert abs(p_np - p_cy) < 1e-14
            assert np.allclose(g_np, g_cy, rtol=0, atol=1e-13)

    def test_ascent_loop(self):
        np_be, cy_be = self._backends()
        rng = np.random.default_rng(2)
        for _ in range(5):
            d, k = 3, 4
            bank = rng.normal(size=(20, d))
            protos = bank[rng.choice(20, size=k, replace=False)]
            beta0 = rng.uniform(size=k)
            h = np_be.mean_pairwise_distance(bank)
            lb, ub = np.full(d, -2.0), np.full(d, 2.0)
            args = (protos, bank, h, lb, ub, beta0, 0.01, 1e-05, 500)
            b_np, it_np, p_np, p0_np, cap_np = np_be.beta_ascent(*args)
            b_cy, it_cy, p_cy, p0_cy, cap_cy = cy_be.beta_ascent(*args)
            assert it_np == it_cy
            assert cap_np == cap_cy
            assert np.allclose(b_np, b_cy, rtol=0, atol=1e-12)
            assert abs(p_np - p_cy) < 1e-13
            assert abs(p0_np - p0_cy) < 1e-13

    def test_readonly_input_arrays_accepted(self):
        _, cy_be = self._backends()
        bank = np.array([[0.0], [1.0]])
        bank.setflags(write=False)
        x = np.array([0.5])
        x.setflags(write=False)
        assert cy_be.kde_likelihood(bank, 1.0, x) > 0
