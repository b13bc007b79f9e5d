"""Distortion engine: identity, ranges, brightness algebra, rotation oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assuremap.dataset import AssuranceSet
from assuremap.distortion import (
    DISTORTION_DOMAINS,
    IDENTITY_LEVEL,
    apply_distortion,
    apply_distortion_batch,
    distort_set,
    inverse_affine,
)


def _image(seed=0, side=28):
    return np.random.default_rng(seed).random((side, side))


def _smooth_image(side=16):
    # Low-frequency content so resampling differences reflect geometry, not
    # interpolation of pixel noise.
    r = np.linspace(0.0, math.pi, side)
    return 0.5 + 0.45 * np.outer(np.sin(r), np.cos(1.7 * r))


def rotate_supersampled(img: np.ndarray, degrees: float, factor: int = 8) -> np.ndarray:
    """Independent rotation oracle: nearest-neighbor on an 8x8-supersampled
    grid (64 samples per pixel), block-averaged back down. Shares only the
    convention (center origin, screen-CCW) with the engine, not the code.
    """
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    sub = (np.arange(factor) + 0.5) / factor - 0.5
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            total = 0.0
            for dy in sub:
                for dx in sub:
                    x = c + dx - cx
                    y = r + dy - cy
                    sx = cos_t * x - sin_t * y + cx
                    sy = sin_t * x + cos_t * y + cy
                    si, sj = int(round(sy)), int(round(sx))
                    if 0 <= si < h and 0 <= sj < w:
                        total += img[si, sj]
            out[r, c] = total / (factor * factor)
    return out


class TestIdentity:
    def test_identity_level_bit_exact(self):
        img = _image()
        out = apply_distortion(img, IDENTITY_LEVEL)
        assert np.array_equal(out, img)

    def test_empty_level_bit_exact(self):
        img = _image(3)
        assert np.array_equal(apply_distortion(img, {}), img)

    def test_identity_does_not_alias_input(self):
        img = _image(4)
        out = apply_distortion(img, {})
        assert not np.shares_memory(out, img)


class TestBrightness:
    def test_uniform_half_times_1_3(self):
        img = np.full((8, 8), 0.5)
        out = apply_distortion(img, {"brightness": 1.3})
        assert np.allclose(out, 0.65)

    def test_clamp_at_one(self):
        img = np.full((8, 8), 0.9)
        out = apply_distortion(img, {"brightness": 1.3})
        assert np.allclose(out, 1.0)

    def test_two_pass_composition_below_clamp(self):
        b1, b2 = 1.1, 1.15
        img = _image(1) / (b1 * b2)  # keeps both passes below the clamp
        once = apply_distortion(img, {"brightness": b1 * b2})
        twice = apply_distortion(apply_distortion(img, {"brightness": b1}), {"brightness": b2})
        assert np.allclose(once, twice, atol=1e-12)

    def test_commutes_with_geometry_below_clamp(self):
        img = _image(2) * 0.7
        geo = {"rotation": 30.0, "scale": 0.9}
        a = apply_distortion(apply_distortion(img, geo), {"brightness": 1.2})
        b = apply_distortion(img, {**geo, "brightness": 1.2})
        assert np.allclose(a, b, atol=1e-6)


class TestRotation:
    def test_rotation_90_single_pixel(self):
        # Bright pixel at (row 0, col 3) in 4x4; rotating 90 degrees CCW about
        # the center moves it to (row 0, col 0).
        img = np.zeros((4, 4))
        img[0, 3] = 1.0
        out = apply_distortion(img, {"rotation": 90.0})
        assert out[0, 0] == pytest.approx(1.0, abs=1e-9)
        assert abs(out.sum() - img.sum()) <= 0.1 * img.sum()

    @pytest.mark.parametrize("degrees", [15.0, 37.0, 60.0, 90.0])
    def test_supersampled_oracle_agreement(self, degrees):
        img = _smooth_image()
        engine = apply_distortion(img, {"rotation": degrees})
        oracle = rotate_supersampled(img, degrees)
        # Bilinear vs supersampled nearest-neighbor: same mass placement,
        # modest per-pixel smoothing differences.
        assert np.abs(engine - oracle).mean() < 0.02
        assert np.abs(engine - oracle).max() < 0.1
        assert engine.sum() == pytest.approx(oracle.sum(), rel=0.05)

    def test_rotation_90_matches_oracle_tightly(self):
        # At exactly 90 degrees every sample lands on a pixel center, so
        # bilinear and nearest-neighbor agree to round-off.
        img = _image(9, side=15)
        engine = apply_distortion(img, {"rotation": 90.0})
        oracle = rotate_supersampled(img, 90.0)
        assert np.abs(engine - oracle).max() < 1e-9


class TestTranslation:
    def test_round_trip_interior(self):
        # delta * width = 2.0 exactly: the round trip must restore the
        # interior (zero-fill only enters within delta*width of the border).
        img = _image(11, side=20)
        h, w = img.shape
        delta = 0.1
        there = apply_distortion(img, {"translate_x": delta})
        back = apply_distortion(there, {"translate_x": -delta})
        margin = int(math.ceil(delta * w)) + 1
        interior = (slice(margin, h - margin), slice(margin, w - margin))
        assert np.allclose(back[interior], img[interior], atol=1e-6)

    def test_translate_down_moves_content(self):
        img = np.zeros((10, 10))
        img[4, 4] = 1.0
        out = apply_distortion(img, {"translate_y": 0.2})
        assert out[6, 4] == pytest.approx(1.0, abs=1e-9)
        assert out[4, 4] == pytest.approx(0.0, abs=1e-9)

    def test_translate_right_moves_content(self):
        img = np.zeros((10, 10))
        img[4, 4] = 1.0
        out = apply_distortion(img, {"translate_x": 0.2})
        assert out[4, 6] == pytest.approx(1.0, abs=1e-9)


class TestValidation:
    @pytest.mark.parametrize(
        "level",
        [
            {"rotation": -1.0},
            {"rotation": 90.5},
            {"scale": 0.69},
            {"scale": 1.31},
            {"translate_x": 0.21},
            {"translate_y": -0.21},
            {"brightness": 0.6},
            {"nonsense": 0.5},
        ],
    )
    def test_out_of_domain_rejected(self, level):
        with pytest.raises(ValueError):
            apply_distortion(_image(), level)

    def test_bad_image_shape_rejected(self):
        with pytest.raises(ValueError):
            apply_distortion(np.zeros((3, 3, 3)), {})

    def test_out_of_range_intensities_rejected(self):
        with pytest.raises(ValueError):
            apply_distortion(np.full((4, 4), 1.5), {})

    def test_registry_domains_frozen(self):
        assert DISTORTION_DOMAINS == {
            "rotation": (0.0, 90.0),
            "scale": (0.7, 1.3),
            "translate_x": (-0.2, 0.2),
            "translate_y": (-0.2, 0.2),
            "brightness": (0.7, 1.3),
        }


@settings(max_examples=25, deadline=None)
@given(
    rotation=st.floats(0.0, 90.0),
    scale=st.floats(0.7, 1.3),
    tx=st.floats(-0.2, 0.2),
    ty=st.floats(-0.2, 0.2),
    brightness=st.floats(0.7, 1.3),
)
def test_output_range_preserved(rotation, scale, tx, ty, brightness):
    img = _image(5, side=12)
    out = apply_distortion(
        img,
        {
            "rotation": rotation,
            "scale": scale,
            "translate_x": tx,
            "translate_y": ty,
            "brightness": brightness,
        },
    )
    assert out.shape == img.shape
    assert out.min() >= 0.0
    assert out.max() <= 1.0


def test_deterministic_across_calls():
    img = _image(13)
    level = {"rotation": 33.3, "scale": 1.1, "translate_x": -0.07, "brightness": 0.8}
    a = apply_distortion(img, level)
    b = apply_distortion(img, level)
    assert np.array_equal(a, b)


def test_batch_matches_single():
    imgs = np.random.default_rng(21).random((5, 10, 10))
    level = {"rotation": 20.0, "translate_y": 0.1}
    batch = apply_distortion_batch(imgs, level)
    for i in range(len(imgs)):
        assert np.array_equal(batch[i], apply_distortion(imgs[i], level))


class TestDistortSet:
    def _set(self):
        rng = np.random.default_rng(17)
        return AssuranceSet(rng.random((6, 8, 8)), np.arange(6) % 3)

    def test_identity_returns_equal_set(self):
        aset = self._set()
        out = distort_set(aset, {})
        assert np.array_equal(out.images, aset.images)
        assert np.array_equal(out.labels, aset.labels)

    def test_cardinality_and_label_order(self):
        aset = self._set()
        out = distort_set(aset, {"rotation": 45.0, "brightness": 1.2})
        assert len(out) == len(aset)
        assert np.array_equal(out.labels, aset.labels)

    def test_brightness_two_pass(self):
        rng = np.random.default_rng(19)
        b1, b2 = 1.05, 1.1
        aset = AssuranceSet(rng.random((4, 6, 6)) / (b1 * b2), np.zeros(4, dtype=np.int64))
        once = distort_set(aset, {"brightness": b1 * b2})
        twice = distort_set(distort_set(aset, {"brightness": b1}), {"brightness": b2})
        assert np.allclose(once.images, twice.images, atol=1e-12)


def test_inverse_affine_identity_is_exact():
    a = inverse_affine(9, 9, {})
    assert np.array_equal(a, np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
