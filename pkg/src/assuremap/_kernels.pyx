# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched bilinear affine warp and RBF cross-kernel.

Arithmetic (per-element expressions and accumulation order) matches the NumPy
fallback in _kernels_py.py exactly; keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, floor

cnp.import_array()


def warp_bilinear(images, inv_affine):
    """See _kernels_py.warp_bilinear; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] imgs = np.ascontiguousarray(
        images, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] aff = np.ascontiguousarray(
        inv_affine, dtype=np.float64)
    cdef Py_ssize_t n = imgs.shape[0]
    cdef Py_ssize_t h = imgs.shape[1]
    cdef Py_ssize_t w = imgs.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.zeros((n, h, w), dtype=np.float64)

    cdef double a00 = aff[0, 0], a01 = aff[0, 1], a02 = aff[0, 2]
    cdef double a10 = aff[1, 0], a11 = aff[1, 1], a12 = aff[1, 2]

    cdef Py_ssize_t i, r, c
    cdef double xs, ys, x0f, y0f, fx, fy, w00, w01, w10, w11, acc
    cdef Py_ssize_t x0, y0, x1, y1

    for r in range(h):
        for c in range(w):
            xs = a00 * c + a01 * r + a02
            ys = a10 * c + a11 * r + a12
            x0f = floor(xs)
            y0f = floor(ys)
            fx = xs - x0f
            fy = ys - y0f
            x0 = <Py_ssize_t> x0f
            y0 = <Py_ssize_t> y0f
            x1 = x0 + 1
            y1 = y0 + 1
            w00 = (1.0 - fx) * (1.0 - fy)
            w01 = fx * (1.0 - fy)
            w10 = (1.0 - fx) * fy
            w11 = fx * fy
            for i in range(n):
                acc = 0.0
                if 0 <= x0 < w and 0 <= y0 < h:
                    acc += w00 * imgs[i, y0, x0]
                if 0 <= x1 < w and 0 <= y0 < h:
                    acc += w01 * imgs[i, y0, x1]
                if 0 <= x0 < w and 0 <= y1 < h:
                    acc += w10 * imgs[i, y1, x0]
                if 0 <= x1 < w and 0 <= y1 < h:
                    acc += w11 * imgs[i, y1, x1]
                out[i, r, c] = acc
    return out


def rbf_cross(x, z, lengthscales, signal_variance):
    """See _kernels_py.rbf_cross; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xa = np.ascontiguousarray(
        x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] za = np.ascontiguousarray(
        z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ls = np.ascontiguousarray(
        lengthscales, dtype=np.float64)
    cdef double sv = signal_variance
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t m = za.shape[0]
    cdef Py_ssize_t d = xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)

    cdef Py_ssize_t i, k, j
    cdef double q, diff
    for i in range(n):
        for k in range(m):
            q = 0.0
            for j in range(d):
                diff = (xa[i, j] - za[k, j]) / ls[j]
                q += diff * diff
            out[i, k] = sv * exp(-0.5 * q)
    return out
