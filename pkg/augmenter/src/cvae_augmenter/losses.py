"""The three training losses and their sum.

total = cvae + dist + pred, all unit-weighted:

- cvae: per-pixel binary cross-entropy of the reconstruction against the
  input (summed over pixels, averaged over the batch) plus the KL divergence
  of the encoder posterior from the standard normal prior.
- dist: how far the batch statistics of the classifier's first
  normalization-layer inputs sit from that layer's imported running
  statistics, as the sum of the two Euclidean distances
  ||mean_batch - mean_run|| + ||var_batch - var_run||. Variances are
  population variances (divide by batch size), matching how the classifier
  accumulated its running estimates.
- pred: mean cross-entropy between the intended labels and the classifier's
  softmax on the reconstructions.

dist and pred both backpropagate through the frozen classifier into the
reconstruction pixels; the classifier's own weights never receive gradients.
"""

import torch

from cvae_augmenter import model_io
from cvae_augmenter.model_io import TorchClassifier


def reconstruction_loss(recon: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Pixel BCE, summed per image and averaged over the batch."""
    per_pixel = torch.nn.functional.binary_cross_entropy(recon, target, reduction="none")
    return per_pixel.sum(dim=1).mean()


def kl_loss(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """KL(q(z|x,y) || N(0, I)), averaged over the batch."""
    per_image = -0.5 * (1.0 + logvar - mu.pow(2) - logvar.exp()).sum(dim=1)
    return per_image.mean()


def distribution_loss(recon, model: TorchClassifier) -> torch.Tensor:
    features = model_io.hidden_preactivations(model, recon)
    if features.shape[0] < 2:
        raise ValueError("distribution_loss needs a batch of at least 2 images")
    batch_mean = features.mean(dim=0)
    batch_var = features.var(dim=0, unbiased=False)
    mean_gap = torch.linalg.vector_norm(batch_mean - model.running_mean)
    var_gap = torch.linalg.vector_norm(batch_var - model.running_variance)
    return mean_gap + var_gap


def prediction_loss(recon, labels, model: TorchClassifier) -> torch.Tensor:
    logits = model_io.class_logits(model, recon)
    targets = torch.as_tensor(labels, dtype=torch.int64)
    if targets.ndim != 1 or targets.shape[0] != logits.shape[0]:
        raise ValueError("labels must be one class index per image")
    if targets.numel() and not bool(((targets >= 0) & (targets < model.class_count)).all()):
        raise ValueError(f"labels must lie in [0, {model.class_count})")
    return torch.nn.functional.cross_entropy(logits, targets)
