"""Deterministic application of a distortion level to grayscale images.

A level combines up to five named distortions, applied in a fixed order:
scale, then rotation, then translation (one combined inverse-mapped affine
resample with bilinear interpolation about the image center, zero fill
outside the frame), then brightness (intensity multiply, clamped to [0, 1]).

Conventions, frozen here: positive rotation turns image content
counterclockwise as displayed; positive translate_x moves content right and
positive translate_y moves it down, both as fractions of width/height; scale
magnifies content about the center. The identity level reproduces the input
bit for bit.
"""

import math
from typing import Mapping

import numpy as np

from assuremap import backend
from assuremap.dataset import AssuranceSet

DISTORTION_DOMAINS = {
    "rotation": (0.0, 90.0),
    "scale": (0.7, 1.3),
    "translate_x": (-0.2, 0.2),
    "translate_y": (-0.2, 0.2),
    "brightness": (0.7, 1.3),
}

IDENTITY_LEVEL = {
    "rotation": 0.0,
    "scale": 1.0,
    "translate_x": 0.0,
    "translate_y": 0.0,
    "brightness": 1.0,
}


def validate_image(img) -> np.ndarray:
    arr = np.ascontiguousarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be a 2-d (h, w) array, got shape {arr.shape}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return arr


def _check_level(level) -> dict:
    # Accepts a plain mapping or anything exposing as_dict() (DistortionLevel).
    if not isinstance(level, Mapping):
        level = level.as_dict()
    full = dict(IDENTITY_LEVEL)
    for name, value in level.items():
        if name not in DISTORTION_DOMAINS:
            raise ValueError(f"unknown distortion {name!r}")
        lo, hi = DISTORTION_DOMAINS[name]
        if not (lo <= value <= hi):
            raise ValueError(f"{name}={value} outside domain [{lo}, {hi}]")
        full[name] = float(value)
    return full


def inverse_affine(height: int, width: int, level: Mapping[str, float]) -> np.ndarray:
    """The 2x3 output->input pixel map for the geometric part of a level.

    Row/col output coordinates map to source sample coordinates via
    ``src = A[:, :2] @ (col, row) + A[:, 2]``; brightness is excluded.
    """
    full = _check_level(level)
    theta = math.radians(full["rotation"])
    s = full["scale"]
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    tx = full["translate_x"] * width
    ty = full["translate_y"] * height
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    # Forward map (content space, y down): p_out = R(theta) @ (s * p_in) + t,
    # with R chosen so positive theta looks counterclockwise on screen.
    # Invert: p_in = R(-theta) @ (p_out - t) / s.
    a00 = cos_t / s
    a01 = -sin_t / s
    a10 = sin_t / s
    a11 = cos_t / s
    bx = -cx - tx
    by = -cy - ty
    return np.array(
        [
            [a00, a01, a00 * bx + a01 * by + cx],
            [a10, a11, a10 * bx + a11 * by + cy],
        ],
        dtype=np.float64,
    )


def apply_distortion_batch(images: np.ndarray, level: Mapping[str, float]) -> np.ndarray:
    """Distort a (n, h, w) stack with one level; the hot path of the oracle."""
    images = np.ascontiguousarray(images, dtype=np.float64)
    if images.ndim != 3:
        raise ValueError(f"expected (n, h, w) image stack, got shape {images.shape}")
    full = _check_level(level)
    n, h, w = images.shape
    geometric = (
        full["rotation"] != 0.0
        or full["scale"] != 1.0
        or full["translate_x"] != 0.0
        or full["translate_y"] != 0.0
    )
    if geometric:
        out = backend.warp_bilinear(images, inverse_affine(h, w, full))
    else:
        out = images.copy()
    b = full["brightness"]
    if b != 1.0:
        out *= b
        np.clip(out, 0.0, 1.0, out=out)
    return out


def apply_distortion(img, level: Mapping[str, float]) -> np.ndarray:
    arr = validate_image(img)
    return apply_distortion_batch(arr[None], level)[0]


def distort_set(aset: AssuranceSet, level: Mapping[str, float]) -> AssuranceSet:
    """Distort every image of a set; labels pass through in order."""
    return AssuranceSet(apply_distortion_batch(aset.images, level), aset.labels)
