"""Conditional VAE trained against a frozen imported classifier.

Both halves are small fully connected float64 networks. The encoder sees the
image concatenated with a one-hot label and emits the posterior mean and log
variance of a low-dimensional latent; the decoder sees a latent sample
concatenated with the same one-hot label and emits sigmoid pixels.

Determinism contract (given AugmenterConfig.seed): torch.manual_seed at the
start of training; the encoder is built before the decoder, layers in
declaration order; each epoch draws one torch.randperm for the shuffle; each
batch draws one randn_like for the reparameterization. Any reimplementation
that replays those draws in the same order reproduces training exactly.
A trailing batch of a single image is dropped (batch statistics need two).

Generation uses a dedicated torch.Generator, so it never perturbs or depends
on global RNG state.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import torch

from cvae_augmenter import losses, model_io
from cvae_augmenter.config import AugmenterConfig
from cvae_augmenter.errors import InputError
from cvae_augmenter.model_io import TorchClassifier


class Encoder(torch.nn.Module):
    def __init__(self, input_dim: int, class_count: int, hidden_dim: int, latent_dim: int):
        super().__init__()
        kw = {"dtype": torch.float64}
        self.body = torch.nn.Linear(input_dim + class_count, hidden_dim, **kw)
        self.mu_head = torch.nn.Linear(hidden_dim, latent_dim, **kw)
        self.logvar_head = torch.nn.Linear(hidden_dim, latent_dim, **kw)

    def forward(self, x: torch.Tensor, onehot: torch.Tensor):
        h = torch.relu(self.body(torch.cat([x, onehot], dim=1)))
        return self.mu_head(h), self.logvar_head(h)


class Decoder(torch.nn.Module):
    def __init__(self, input_dim: int, class_count: int, hidden_dim: int, latent_dim: int):
        super().__init__()
        kw = {"dtype": torch.float64}
        self.body = torch.nn.Linear(latent_dim + class_count, hidden_dim, **kw)
        self.out = torch.nn.Linear(hidden_dim, input_dim, **kw)

    def forward(self, z: torch.Tensor, onehot: torch.Tensor) -> torch.Tensor:
        h = torch.relu(self.body(torch.cat([z, onehot], dim=1)))
        return torch.sigmoid(self.out(h))


@dataclass(frozen=True)
class BatchLoss:
    """One optimizer step's objective and its three (weighted) parts."""

    total: float
    cvae: float
    dist: float
    pred: float


@dataclass(frozen=True)
class GeneratedBatch:
    """Decoder samples with their intended labels and classifier confidences."""

    images: np.ndarray
    labels: np.ndarray
    confidences: np.ndarray

    def __post_init__(self):
        n = len(self.images)
        if self.images.ndim != 3 or self.labels.shape != (n,) or self.confidences.shape != (n,):
            raise ValueError("images (n, rows, cols), labels (n,), confidences (n,) required")

    def __len__(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class TrainedGenerator:
    encoder: Encoder
    decoder: Decoder
    model: TorchClassifier
    config: AugmenterConfig
    image_shape: Tuple[int, int]
    loss_log: List[List[BatchLoss]]

    def epoch_mean_totals(self) -> List[float]:
        return [float(np.mean([b.total for b in epoch])) for epoch in self.loss_log]


def _one_hot(labels: torch.Tensor, class_count: int) -> torch.Tensor:
    return torch.nn.functional.one_hot(labels, class_count).to(torch.float64)


def train_cvae(
    images: np.ndarray,
    labels: np.ndarray,
    model: TorchClassifier,
    config: AugmenterConfig,
    dist_weight: float = 1.0,
    pred_weight: float = 1.0,
) -> TrainedGenerator:
    """Fit the generator on a (small) labeled set; see the module docstring
    for the exact RNG protocol behind "deterministic given seed".

    dist_weight/pred_weight exist so tests can switch off the classifier
    couplings; both are 1 in normal use.
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim != 3 or len(images) != len(labels):
        raise InputError("expected (n, rows, cols) images with one label each")
    if len(images) < 2:
        raise InputError("training needs at least 2 images")
    rows, cols = images.shape[1:]
    if rows * cols != model.input_dim:
        raise InputError(f"{rows}x{cols} images do not match input_dim {model.input_dim}")
    present = set(int(v) for v in np.unique(labels))
    missing = [c for c in range(model.class_count) if c not in present]
    if missing or min(present) < 0 or max(present) >= model.class_count:
        raise InputError(
            f"every class in [0, {model.class_count}) needs at least one image; "
            f"missing {missing}, saw {sorted(present)}"
        )

    torch.manual_seed(config.seed)
    encoder = Encoder(model.input_dim, model.class_count, config.hidden_dim, config.latent_dim)
    decoder = Decoder(model.input_dim, model.class_count, config.hidden_dim, config.latent_dim)
    params = list(encoder.parameters()) + list(decoder.parameters())
    optimizer = torch.optim.Adam(params, lr=config.learning_rate)

    x_all = torch.from_numpy(images.reshape(len(images), -1))
    y_all = torch.from_numpy(labels)
    onehot_all = _one_hot(y_all, model.class_count)

    n = len(images)
    log: List[List[BatchLoss]] = []
    for _ in range(config.epochs):
        perm = torch.randperm(n)
        epoch_log: List[BatchLoss] = []
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            if len(idx) < 2:
                continue
            x = x_all[idx]
            onehot = onehot_all[idx]

            mu, logvar = encoder(x, onehot)
            z = mu + torch.exp(0.5 * logvar) * torch.randn_like(mu)
            recon = decoder(z, onehot)

            l_cvae = losses.reconstruction_loss(recon, x) + losses.kl_loss(mu, logvar)
            l_dist = (
                dist_weight * losses.distribution_loss(recon, model)
                if dist_weight != 0.0
                else torch.zeros((), dtype=torch.float64)
            )
            l_pred = (
                pred_weight * losses.prediction_loss(recon, y_all[idx], model)
                if pred_weight != 0.0
                else torch.zeros((), dtype=torch.float64)
            )
            total = l_cvae + l_dist + l_pred

            optimizer.zero_grad()
            total.backward()
            optimizer.step()
            epoch_log.append(
                BatchLoss(total.item(), l_cvae.item(), l_dist.item(), l_pred.item())
            )
        log.append(epoch_log)

    for p in params:
        p.requires_grad_(False)
    return TrainedGenerator(encoder, decoder, model, config, (rows, cols), log)


def generate(generator: TrainedGenerator, count: int, seed: Optional[int] = None) -> GeneratedBatch:
    """Sample `count` images, labels cycling 0..k-1, confidences from the classifier."""
    if count < 0:
        raise InputError(f"count must be nonnegative, got {count}")
    if seed is None:
        seed = generator.config.seed
    k = generator.model.class_count
    rows, cols = generator.image_shape
    labels = np.arange(count, dtype=np.int64) % k

    rng = torch.Generator().manual_seed(int(seed))
    z = torch.randn(count, generator.config.latent_dim, generator=rng, dtype=torch.float64)
    with torch.no_grad():
        recon = generator.decoder(z, _one_hot(torch.from_numpy(labels), k))
    images = recon.numpy().reshape(count, rows, cols)
    conf = model_io.confidences(generator.model, images)
    return GeneratedBatch(images, labels, conf)
