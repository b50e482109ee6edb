"""Backend selection and numpy-fallback equivalence of the hot kernels."""

import subprocess
import sys

import numpy as np
import pytest

import nlwave._backend as backend
from nlwave._backend import (
    _convolve_pair_np,
    _convolve_rhs_np,
    _polynomial_np,
)


def pair_oracle(w, v, h):
    n = (len(w) - 1) // 2
    out = np.zeros(2 * n + 1)
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            if -n <= i - j <= n:
                out[i + n] += h * w[i - j + n] * v[j + n]
    return out


def rhs_oracle(stencil, g, h):
    n = (len(g) - 1) // 2
    out = np.zeros(2 * n + 1)
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            out[i + n] -= h * stencil[i - j + 2 * n] * g[j + n]
    return out


@pytest.fixture
def random_data():
    rng = np.random.default_rng(314)
    n = 24
    w = rng.standard_normal(2 * n + 1)
    v = rng.standard_normal(2 * n + 1)
    stencil = rng.standard_normal(4 * n + 1)
    return w, v, stencil, 0.25


class TestNumpyFallbacks:
    def test_pair_convolution(self, random_data):
        w, v, _, h = random_data
        expected = pair_oracle(w, v, h)
        assert np.max(np.abs(_convolve_pair_np(w, v, h) - expected)) < 1e-13

    def test_rhs_convolution(self, random_data):
        w, _, stencil, h = random_data
        expected = rhs_oracle(stencil, w, h)
        assert np.max(np.abs(_convolve_rhs_np(stencil, w, h) - expected)) < 1e-13

    def test_polynomial(self):
        powers = np.array([1, 3, 5], dtype=np.int64)
        coeffs = np.array([1.0, -10.0, 12.0])
        v = np.linspace(-1.0, 1.0, 11)
        expected = v - 10 * v**3 + 12 * v**5
        assert np.max(np.abs(_polynomial_np(powers, coeffs, v) - expected)) < 1e-14


@pytest.mark.skipif(backend.BACKEND != "numba", reason="numba not active")
class TestNumbaAgreement:
    def test_pair_convolution_matches_numpy(self, random_data):
        w, v, _, h = random_data
        a = backend.convolve_pair_direct(w, v, h)
        b = _convolve_pair_np(w, v, h)
        assert np.max(np.abs(a - b)) < 1e-13

    def test_rhs_convolution_matches_numpy(self, random_data):
        w, _, stencil, h = random_data
        a = backend.convolve_rhs_direct(stencil, w, h)
        b = _convolve_rhs_np(stencil, w, h)
        assert np.max(np.abs(a - b)) < 1e-13

    def test_polynomial_matches_numpy(self):
        powers = np.array([1, 3, 5], dtype=np.int64)
        coeffs = np.array([1.0, -10.0, 12.0])
        v = np.linspace(-1.0, 1.0, 11)
        a = backend.polynomial_terms(powers, coeffs, v)
        b = _polynomial_np(powers, coeffs, v)
        assert np.max(np.abs(a - b)) < 1e-14


class TestEnvFlag:
    def run_probe(self, env_value):
        code = (
            "import numpy as np\n"
            "from nlwave import Grid, Nonlinearity, bbm_kernel, build_system\n"
            "from nlwave import BACKEND\n"
            "g = Grid(h=0.5, n_half=8)\n"
            "system = build_system(bbm_kernel(), g, Nonlinearity.bbm(1))\n"
            "v = np.sin(g.nodes)\n"
            "print(BACKEND)\n"
            "print(repr(float(np.sum(system.rhs_values(v)))))\n"
        )
        import os

        env = dict(os.environ)
        if env_value is None:
            env.pop("NLWAVE_BACKEND", None)
        else:
            env["NLWAVE_BACKEND"] = env_value
        return subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True)

    def test_numpy_backend_forced(self):
        proc = self.run_probe("numpy")
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.splitlines()[0] == "numpy"

    def test_backends_agree_numerically(self):
        a = self.run_probe("numpy")
        b = self.run_probe(None)
        assert a.returncode == 0 and b.returncode == 0
        va = float(a.stdout.splitlines()[1])
        vb = float(b.stdout.splitlines()[1])
        assert abs(va - vb) < 1e-12

    def test_bogus_backend_rejected(self):
        proc = self.run_probe("bogus")
        assert proc.returncode != 0
