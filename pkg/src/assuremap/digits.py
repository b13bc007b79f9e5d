"""Deterministic generated digit corpus.

Each sample renders a 7x5 glyph bitmap into a 28x28 canvas with jittered
scale, placement, stroke intensity, and additive pixel noise. The corpus is
a self-contained stand-in for handwritten-digit data: no downloads, fully
reproducible from a seed, and easy for a small classifier to learn while
still degrading under geometric distortion.
"""

import numpy as np

from assuremap.dataset import AssuranceSet

IMAGE_SIDE = 28

_GLYPH_ROWS = {
    0: (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    1: ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    2: (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    3: (".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."),
    4: ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    5: ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    6: (".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."),
    7: ("#####", "....#", "...#.", "..#..", "..#..", ".#...", ".#..."),
    8: (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    9: (".###.", "#...#", "#...#", ".####", "....#", "....#", ".###."),
}

_GLYPHS = {
    digit: np.array(
        [[1.0 if ch == "#" else 0.0 for ch in row] for row in rows], dtype=np.float64
    )
    for digit, rows in _GLYPH_ROWS.items()
}

_SCALE_RANGE = (2.6, 3.2)
_INTENSITY_RANGE = (0.75, 1.0)
_NOISE_SIGMA = 0.03
_RNG_TAG = 0xD161


def render_digit(digit: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one jittered 28x28 rendering of `digit`."""
    glyph = _GLYPHS[digit]
    gh, gw = glyph.shape

    scale = rng.uniform(*_SCALE_RANGE)
    height = int(round(gh * scale))
    width = int(round(gw * scale))
    # Near-centered placement (+/- 2 px jitter), like size-normalized digit data.
    row0 = (IMAGE_SIDE - height) // 2 + int(rng.integers(-2, 3))
    col0 = (IMAGE_SIDE - width) // 2 + int(rng.integers(-2, 3))
    row0 = min(max(row0, 0), IMAGE_SIDE - height)
    col0 = min(max(col0, 0), IMAGE_SIDE - width)
    intensity = rng.uniform(*_INTENSITY_RANGE)

    # Nearest-neighbor upscale of the glyph into its jittered bounding box.
    src_rows = np.minimum(((np.arange(height) + 0.5) * gh / height).astype(np.intp), gh - 1)
    src_cols = np.minimum(((np.arange(width) + 0.5) * gw / width).astype(np.intp), gw - 1)
    patch = glyph[np.ix_(src_rows, src_cols)] * intensity

    canvas = np.zeros((IMAGE_SIDE, IMAGE_SIDE), dtype=np.float64)
    canvas[row0 : row0 + height, col0 : col0 + width] = patch
    canvas += rng.normal(0.0, _NOISE_SIGMA, size=canvas.shape)
    return np.clip(canvas, 0.0, 1.0)


def make_corpus(per_class: int, seed: int) -> AssuranceSet:
    """Render `per_class` samples of each digit, class-interleaved order."""
    if per_class <= 0:
        raise ValueError(f"per_class must be positive, got {per_class}")
    rng = np.random.default_rng([seed, _RNG_TAG])
    images = np.empty((10 * per_class, IMAGE_SIDE, IMAGE_SIDE), dtype=np.float64)
    labels = np.empty(10 * per_class, dtype=np.int64)
    idx = 0
    for _ in range(per_class):
        for digit in range(10):
            images[idx] = render_digit(digit, rng)
            labels[idx] = digit
            idx += 1
    return AssuranceSet(images, labels)


def train_test_split(aset: AssuranceSet, test_fraction: float, seed: int):
    """Deterministic class-stratified split; returns (train, test).

    Every class contributes at least one test image, so accuracies measured
    on the test side always cover the full label set.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng([seed, 0x5817])
    test_parts = []
    for cls in np.unique(aset.labels):
        idx = np.flatnonzero(aset.labels == cls)
        perm = idx[rng.permutation(len(idx))]
        n_test = max(1, int(round(len(idx) * test_fraction)))
        test_parts.append(perm[:n_test])
    test_idx = np.sort(np.concatenate(test_parts))
    in_test = np.zeros(len(aset), dtype=bool)
    in_test[test_idx] = True
    train_idx = np.flatnonzero(~in_test)
    train = AssuranceSet(aset.images[train_idx], aset.labels[train_idx])
    test = AssuranceSet(aset.images[test_idx], aset.labels[test_idx])
    return train, test
