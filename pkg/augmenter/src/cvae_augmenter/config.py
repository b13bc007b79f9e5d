"""Augmenter configuration: generator size, training schedule, filter level."""

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class AugmenterConfig:
    model_path: Path
    sample_count: int
    latent_dim: int = 2
    hidden_dim: int = 400
    batch_size: int = 16
    epochs: int = 600
    alpha: float = 0.8
    seed: int = 0
    learning_rate: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "model_path", Path(self.model_path))
        for name in ("sample_count", "latent_dim", "hidden_dim", "batch_size", "epochs"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
