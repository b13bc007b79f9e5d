"""Parity between the compiled kernels and the NumPy fallback.

Skips cleanly when the extension is not built; everything else in the suite
runs against whichever backend imported.
"""

import subprocess
import sys

import numpy as np
import pytest

from assuremap import _kernels_py, backend

native = pytest.importorskip(
    "assuremap._kernels", reason="compiled extension not built"
)


def random_images(n=8, h=13, w=11, seed=0):
    return np.random.default_rng(seed).random((n, h, w))


def random_affines(count, seed=1):
    rng = np.random.default_rng(seed)
    # Rotations/scales/shifts in the realistic range, plus sign flips.
    mats = []
    for _ in range(count):
        theta = rng.uniform(-np.pi / 2, np.pi / 2)
        s = rng.uniform(0.7, 1.3)
        tx, ty = rng.uniform(-4, 4, size=2)
        c, si = np.cos(theta) / s, np.sin(theta) / s
        mats.append(np.array([[c, -si, tx], [si, c, ty]]))
    return mats


class TestWarpParity:
    def test_bitwise_equal_on_random_affines(self):
        images = random_images()
        for affine in random_affines(12):
            got = native.warp_bilinear(images, affine)
            want = _kernels_py.warp_bilinear(images, affine)
            np.testing.assert_array_equal(got, want)

    def test_identity_affine_returns_input_exactly(self):
        images = random_images(seed=5)
        identity = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        np.testing.assert_array_equal(
            native.warp_bilinear(images, identity), images
        )

    def test_out_of_frame_samples_are_zero(self):
        images = np.ones((1, 4, 4))
        shift_far = np.array([[1.0, 0.0, 100.0], [0.0, 1.0, 0.0]])
        out = native.warp_bilinear(images, shift_far)
        np.testing.assert_array_equal(out, np.zeros_like(images))


class TestRbfParity:
    def test_agreement_within_round_off(self):
        rng = np.random.default_rng(2)
        x = rng.random((300, 5))
        z = rng.random((120, 5))
        ls = rng.uniform(0.05, 1.0, 5)
        got = native.rbf_cross(x, z, ls, 1.7)
        want = _kernels_py.rbf_cross(x, z, ls, 1.7)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-14)

    def test_symmetric_self_kernel(self):
        rng = np.random.default_rng(3)
        x = rng.random((50, 3))
        ls = np.full(3, 0.3)
        k = native.rbf_cross(x, x, ls, 1.0)
        np.testing.assert_allclose(k, k.T, atol=1e-15)
        np.testing.assert_allclose(np.diag(k), 1.0, atol=1e-15)


class TestSelection:
    def test_this_session_uses_native(self):
        assert backend.HAVE_NATIVE
        assert backend.BACKEND == "native"

    @pytest.mark.parametrize("request_name", ["python", "native", "auto"])
    def test_env_var_selects_backend(self, request_name):
        code = (
            "from assuremap import backend; print(backend.BACKEND)"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "ASSUREMAP_BACKEND": request_name},
        )
        assert out.returncode == 0, out.stderr
        expect = "python" if request_name == "python" else "native"
        assert out.stdout.strip() == expect

    def test_invalid_env_var_rejected(self):
        out = subprocess.run(
            [sys.executable, "-c", "import assuremap.backend"],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "ASSUREMAP_BACKEND": "cuda"},
        )
        assert out.returncode != 0
        assert "ASSUREMAP_BACKEND" in out.stderr

    def test_python_backend_runs_full_loop(self):
        # The fallback must be a drop-in: drive a small sampling run with it.
        code = """
from assuremap import backend, lse, surfaces
from assuremap.space import default_search_space
assert backend.BACKEND == "python"
space = default_search_space(("rotation", "scale"))
surf = surfaces.benchmark_surface("radial_bump", space)
cfg = lse.AssuranceRunConfig(threshold=0.85, budget=25, init_points=5, pool_size=200)
run = lse.run_lse(cfg, surf.accuracy, space)
assert len(run.history) == 25
print("ok")
"""
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "ASSUREMAP_BACKEND": "python"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "ok"
