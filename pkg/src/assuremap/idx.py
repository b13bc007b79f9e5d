"""IDX image/label file IO, drop-in compatible with the classic MNIST layout.

Images: magic 0x00000803, then big-endian uint32 count/rows/cols, then
unsigned-byte pixels; intensities scale by 1/255 on load. Labels: magic
0x00000801, big-endian uint32 count, then unsigned-byte labels.
"""

import struct
from pathlib import Path

import numpy as np

from assuremap.dataset import AssuranceSet
from assuremap.errors import FormatError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_exact(handle, count, what):
    data = handle.read(count)
    if len(data) != count:
        raise FormatError(
            f"truncated IDX file while reading {what}", offset=handle.tell() - len(data)
        )
    return data


def read_idx_images(path) -> np.ndarray:
    """Load (n, rows, cols) float64 intensities in [0, 1]."""
    with open(path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, "header"))
        if magic != IMAGE_MAGIC:
            raise FormatError(
                f"bad image magic 0x{magic:08x} in {path}, expected 0x{IMAGE_MAGIC:08x}",
                offset=0,
            )
        raw = _read_exact(fh, count * rows * cols, "pixel data")
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"trailing bytes in {path}", offset=fh.tell() - 1)
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)
    return pixels.astype(np.float64) / 255.0


def read_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, count = struct.unpack(">II", _read_exact(fh, 8, "header"))
        if magic != LABEL_MAGIC:
            raise FormatError(
                f"bad label magic 0x{magic:08x} in {path}, expected 0x{LABEL_MAGIC:08x}",
                offset=0,
            )
        raw = _read_exact(fh, count, "label data")
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"trailing bytes in {path}", offset=fh.tell() - 1)
    return np.frombuffer(raw, dtype=np.uint8).astype(np.int64)


def write_idx_images(path, images: np.ndarray):
    """Quantize [0, 1] intensities to unsigned bytes (round-half-up via rint)."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3:
        raise ValueError(f"expected (n, rows, cols), got shape {images.shape}")
    if images.size and (images.min() < 0.0 or images.max() > 1.0):
        raise ValueError("image intensities must lie in [0, 1]")
    n, rows, cols = images.shape
    quantized = np.rint(images * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(quantized.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError(f"expected (n,) labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise ValueError("labels must fit in an unsigned byte")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def read_idx_pair(images_path, labels_path) -> AssuranceSet:
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise FormatError(
            f"{images_path} has {len(images)} images but {labels_path} has "
            f"{len(labels)} labels"
        )
    return AssuranceSet(images, labels)


def write_idx_pair(images_path, labels_path, aset: AssuranceSet):
    write_idx_images(images_path, aset.images)
    write_idx_labels(labels_path, aset.labels)


def resolve_synthetic_paths(path):
    """Map a --synthetic argument to (images, labels) file paths.

    Accepts the augmenter output directory (standard file names) or the
    images file itself, with labels found by the -images.idx -> -labels.idx
    naming rule.
    """
    p = Path(path)
    if p.is_dir():
        return p / "synthetic-images.idx", p / "synthetic-labels.idx"
    name = p.name
    if name.endswith("-images.idx"):
        return p, p.with_name(name[: -len("-images.idx")] + "-labels.idx")
    raise FormatError(
        f"cannot locate labels for {path}: pass a directory or a *-images.idx file"
    )
