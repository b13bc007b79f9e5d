"""Benchmark the compiled kernels against the NumPy fallback.

Run:  python3 benchmarks/bench_backends.py

Times the two hot paths (bilinear affine warping and the RBF cross-kernel)
on workload sizes matching a real assurance run, and verifies that the two
implementations agree to near round-off. Selecting a backend for real runs
happens via ASSUREMAP_BACKEND (auto | native | python).
"""

import time

import numpy as np

from assuremap import _kernels_py
from assuremap import backend
from assuremap.distortion import inverse_affine


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_warp(native_impl, n_images: int = 240, side: int = 28, repeats: int = 20):
    rng = np.random.default_rng(0)
    images = rng.random((n_images, side, side))
    affine = inverse_affine(
        side, side, {"rotation": 30.0, "scale": 0.9, "translate_x": 0.1}
    )
    t_py = _time(lambda: _kernels_py.warp_bilinear(images, affine), repeats)
    t_nat = _time(lambda: native_impl.warp_bilinear(images, affine), repeats)
    diff = np.abs(
        _kernels_py.warp_bilinear(images, affine) - native_impl.warp_bilinear(images, affine)
    ).max()
    return t_py, t_nat, diff


def bench_rbf(native_impl, n_train: int = 400, n_query: int = 10_000, d: int = 5, repeats: int = 10):
    rng = np.random.default_rng(1)
    x = rng.random((n_query, d))
    z = rng.random((n_train, d))
    ls = rng.uniform(0.1, 0.5, d)
    t_py = _time(lambda: _kernels_py.rbf_cross(x, z, ls, 1.3), repeats)
    t_nat = _time(lambda: native_impl.rbf_cross(x, z, ls, 1.3), repeats)
    diff = np.abs(_kernels_py.rbf_cross(x, z, ls, 1.3) - native_impl.rbf_cross(x, z, ls, 1.3)).max()
    return t_py, t_nat, diff


def main():
    if not backend.HAVE_NATIVE:
        print("compiled extension not built; nothing to compare (python backend only)")
        return
    from assuremap import _kernels as native

    print(f"active backend: {backend.BACKEND}")
    t_py, t_nat, diff = bench_warp(native)
    print(
        f"warp_bilinear  240x28x28 : python {t_py * 1e3:8.2f} ms   "
        f"native {t_nat * 1e3:8.2f} ms   speedup {t_py / t_nat:5.1f}x   max|diff| {diff:.2e}"
    )
    t_py, t_nat, diff = bench_rbf(native)
    print(
        f"rbf_cross 10000x400 d=5  : python {t_py * 1e3:8.2f} ms   "
        f"native {t_nat * 1e3:8.2f} ms   speedup {t_py / t_nat:5.1f}x   max|diff| {diff:.2e}"
    )


if __name__ == "__main__":
    main()
