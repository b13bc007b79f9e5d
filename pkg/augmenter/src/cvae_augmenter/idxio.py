"""IDX image/label files, the on-disk interface shared with the harness.

Images: magic 0x00000803, big-endian uint32 count/rows/cols, then unsigned
bytes row-major; intensities are v/255 on load. Labels: magic 0x00000801,
big-endian uint32 count, then unsigned bytes. Writers require intensities in
[0, 1] and quantize with rint(x * 255); empty pairs (count 0) are valid.
"""

import struct
from pathlib import Path

import numpy as np

from cvae_augmenter.errors import FormatError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _take(handle, count, what):
    data = handle.read(count)
    if len(data) != count:
        raise FormatError(f"truncated IDX file in {what}", offset=handle.tell() - len(data))
    return data


def read_images(path) -> np.ndarray:
    """Read an IDX image file into (n, rows, cols) float64 intensities."""
    with open(path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(">IIII", _take(fh, 16, "header"))
        if magic != IMAGE_MAGIC:
            raise FormatError(f"bad image magic 0x{magic:08x} in {path}", offset=0)
        body = _take(fh, count * rows * cols, "pixel data")
        if fh.read(1):
            raise FormatError(f"trailing bytes in {path}", offset=fh.tell() - 1)
    raw = np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols)
    return raw.astype(np.float64) / 255.0


def read_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, count = struct.unpack(">II", _take(fh, 8, "header"))
        if magic != LABEL_MAGIC:
            raise FormatError(f"bad label magic 0x{magic:08x} in {path}", offset=0)
        body = _take(fh, count, "label data")
        if fh.read(1):
            raise FormatError(f"trailing bytes in {path}", offset=fh.tell() - 1)
    return np.frombuffer(body, dtype=np.uint8).astype(np.int64)


def write_images(path, images: np.ndarray):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3:
        raise ValueError(f"expected (n, rows, cols) images, got shape {images.shape}")
    if images.size and (images.min() < 0.0 or images.max() > 1.0):
        raise ValueError("image intensities must lie in [0, 1]")
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(np.rint(images * 255.0).astype(np.uint8).tobytes())


def write_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError(f"expected (n,) labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise ValueError("labels must fit in an unsigned byte")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def read_pair(images_path, labels_path):
    """Read a matching image/label pair; lengths must agree."""
    images = read_images(images_path)
    labels = read_labels(labels_path)
    if len(images) != len(labels):
        raise FormatError(
            f"{images_path} has {len(images)} images but {labels_path} has "
            f"{len(labels)} labels"
        )
    return images, labels


def quantize(images: np.ndarray) -> np.ndarray:
    """What a written image reads back as: the uint8 round trip of [0, 1] pixels."""
    images = np.asarray(images, dtype=np.float64)
    return np.rint(images * 255.0) / 255.0
