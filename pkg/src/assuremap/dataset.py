"""Labeled image sets: the data the assurance process runs on."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AssuranceSet:
    """A stack of grayscale images with integer class labels.

    images: (n, height, width) float64 with intensities in [0, 1].
    labels: (n,) integer class indices.
    """

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        images = np.ascontiguousarray(self.images, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if images.ndim != 3:
            raise ValueError(f"images must be (n, h, w), got shape {images.shape}")
        if labels.ndim != 1 or len(labels) != len(images):
            raise ValueError(
                f"labels must be (n,) matching images, got {labels.shape} vs {len(images)}"
            )
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("image intensities must lie in [0, 1]")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be non-negative class indices")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.images)


def merge_sets(first: AssuranceSet, second: AssuranceSet) -> AssuranceSet:
    """Concatenate two sets; the second may be empty."""
    if len(second) == 0:
        return first
    if len(first) == 0:
        return second
    if first.images.shape[1:] != second.images.shape[1:]:
        raise ValueError(
            f"image shapes differ: {first.images.shape[1:]} vs {second.images.shape[1:]}"
        )
    return AssuranceSet(
        np.concatenate([first.images, second.images]),
        np.concatenate([first.labels, second.labels]),
    )


def few_shot_subset(full: AssuranceSet, per_class: int, seed: int) -> AssuranceSet:
    """Draw `per_class` images per class, uniformly without replacement.

    Selection order is deterministic in (seed, label order); the result keeps
    class-sorted order so runs are reproducible.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    rng = np.random.default_rng([seed, 0x5EED])
    chosen = []
    for cls in np.unique(full.labels):
        idx = np.flatnonzero(full.labels == cls)
        if len(idx) < per_class:
            raise ValueError(f"class {cls} has only {len(idx)} images, need {per_class}")
        chosen.append(rng.choice(idx, size=per_class, replace=False))
    order = np.sort(np.concatenate(chosen))
    return AssuranceSet(full.images[order], full.labels[order])
