"""Confidence filtering and the IDX handoff to the assurance harness.

The harness side of the handoff re-reads the written images (uint8
quantized), recomputes classifier confidences, and keeps those strictly
above alpha. The writer therefore applies the same strict rule to
the quantized pixels with a fixed 1e-3 margin on top, so nothing it writes
can fall below the harness's bar through quantization or arithmetic drift.
"""

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cvae_augmenter import idxio, model_io
from cvae_augmenter.cvae import GeneratedBatch
from cvae_augmenter.model_io import TorchClassifier

WRITE_MARGIN = 1e-3
IMAGES_NAME = "synthetic-images.idx"
LABELS_NAME = "synthetic-labels.idx"
MANIFEST_NAME = "manifest.json"
_HISTOGRAM_BINS = 10


@dataclass(frozen=True)
class PostProcessResult:
    kept: GeneratedBatch
    written: int
    images_path: Path
    labels_path: Path
    manifest_path: Path
    manifest: dict


def confident_subset(batch: GeneratedBatch, alpha: float) -> GeneratedBatch:
    """Images whose stored confidence is strictly above alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    keep = batch.confidences > alpha
    return GeneratedBatch(batch.images[keep], batch.labels[keep], batch.confidences[keep])


def post_process(
    batch: GeneratedBatch,
    alpha: float,
    out_dir,
    model: TorchClassifier,
    seed: int = 0,
) -> PostProcessResult:
    """Filter at alpha, then write the survivors as an IDX pair plus manifest.

    The returned `kept` batch is the plain alpha filter. The files additionally
    require confidence > alpha + WRITE_MARGIN on the quantized pixels, so the
    harness's own re-check at alpha discards nothing.
    """
    kept = confident_subset(batch, alpha)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if len(kept):
        quant_conf = model_io.confidences(model, idxio.quantize(kept.images))
        firm = quant_conf > alpha + WRITE_MARGIN
    else:
        firm = np.zeros(0, dtype=bool)
    to_write_images = kept.images[firm]
    to_write_labels = kept.labels[firm]
    if len(to_write_images) == 0:
        warnings.warn(f"no generated image clears alpha={alpha} plus margin; writing empty set")

    images_path = out_dir / IMAGES_NAME
    labels_path = out_dir / LABELS_NAME
    idxio.write_images(images_path, to_write_images)
    idxio.write_labels(labels_path, to_write_labels)

    hist, _ = np.histogram(batch.confidences, bins=_HISTOGRAM_BINS, range=(0.0, 1.0))
    manifest = {
        "generated": len(batch),
        "kept": len(kept),
        "written": int(firm.sum()),
        "alpha": alpha,
        "write_margin": WRITE_MARGIN,
        "seed": int(seed),
        "confidence_histogram": [int(c) for c in hist],
    }
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return PostProcessResult(kept, manifest["written"], images_path, labels_path, manifest_path, manifest)
