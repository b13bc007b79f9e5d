"""NumPy implementations of the hot kernels.

These mirror the compiled extension in assuremap._kernels operation for
operation (same per-element arithmetic, same accumulation order) so the two
backends agree to floating-point equality. Keep the two files in sync.
"""

import numpy as np


def warp_bilinear(images, inv_affine):
    """Inverse-map an affine transform over a batch of grayscale images.

    For each output pixel (row r, col c) the source location is
    ``x = a00*c + a01*r + a02``, ``y = a10*c + a11*r + a12`` and the output is
    the bilinear interpolation of the four surrounding input pixels; samples
    falling outside the frame contribute zero.

    images: (n, h, w) float64, C-contiguous. inv_affine: (2, 3) float64.
    Returns a new (n, h, w) array.
    """
    images = np.ascontiguousarray(images, dtype=np.float64)
    n, h, w = images.shape
    a = np.asarray(inv_affine, dtype=np.float64)

    cols = np.arange(w, dtype=np.float64)
    rows = np.arange(h, dtype=np.float64)
    cgrid, rgrid = np.meshgrid(cols, rows)
    xs = a[0, 0] * cgrid + a[0, 1] * rgrid + a[0, 2]
    ys = a[1, 0] * cgrid + a[1, 1] * rgrid + a[1, 2]

    x0f = np.floor(xs)
    y0f = np.floor(ys)
    fx = xs - x0f
    fy = ys - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)
    x1 = x0 + 1
    y1 = y0 + 1

    w00 = (1.0 - fx) * (1.0 - fy)
    w01 = fx * (1.0 - fy)
    w10 = (1.0 - fx) * fy
    w11 = fx * fy

    out = np.zeros_like(images)
    for yy, xx, ww in ((y0, x0, w00), (y0, x1, w01), (y1, x0, w10), (y1, x1, w11)):
        valid = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
        xc = np.clip(xx, 0, w - 1)
        yc = np.clip(yy, 0, h - 1)
        out += (ww * valid) * images[:, yc, xc]
    return out


def rbf_cross(x, z, lengthscales, signal_variance):
    """Squared-exponential cross-kernel matrix between two point sets.

    x: (n, d), z: (m, d), both in normalized coordinates. Returns (n, m) with
    entry ``sv * exp(-0.5 * sum_j ((x_ij - z_kj) / ls_j)^2)``.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    ls = np.asarray(lengthscales, dtype=np.float64)
    n, d = x.shape
    q = np.zeros((n, z.shape[0]), dtype=np.float64)
    for j in range(d):
        diff = (x[:, j, None] - z[None, :, j]) / ls[j]
        q += diff * diff
    return signal_variance * np.exp(-0.5 * q)
