"""Few-shot conditional-VAE augmenter for the assurance-map harness.

Trains a small conditional VAE on a handful of labeled images while pulling
its reconstructions toward what a frozen, imported classifier expects to see
(matching the classifier's first normalization layer statistics and its
label predictions), then generates, confidence-filters, and writes synthetic
images in the IDX format the harness ingests.
"""

from cvae_augmenter.config import AugmenterConfig
from cvae_augmenter.cvae import GeneratedBatch, TrainedGenerator, generate, train_cvae
from cvae_augmenter.postprocess import confident_subset, post_process

__all__ = [
    "AugmenterConfig",
    "GeneratedBatch",
    "TrainedGenerator",
    "generate",
    "train_cvae",
    "confident_subset",
    "post_process",
]
