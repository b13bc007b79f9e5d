"""Reader, writer, and forward pass for the assurance-map model text format.

The classifier under test arrives as a plain-text document (see the harness
repo's docs/model_format.md): magic line, five integer scalars, eight float64
arrays at 17 significant digits. This module reimplements the format from
that document alone so the two packages stay coupled only through the file.

The forward pass is pure torch and differentiable with respect to the input
images, which is what the distribution and prediction losses need:

    probabilities = softmax(relu(norm(x @ w1 + b1)) @ w2 + b2)
    norm(a)       = (a - running_mean) / sqrt(running_variance + 1e-5) * scale + shift
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from cvae_augmenter.errors import FormatError

MAGIC = "assuremap-model"
VERSION = 1
NORM_EPS = 1e-5

_SCALARS = ("version", "input_dim", "hidden_dim", "class_count", "seed")
_ARRAYS = ("w1", "b1", "running_mean", "running_variance", "scale", "shift", "w2", "b2")


@dataclass(frozen=True)
class TorchClassifier:
    """The imported model: float64 tensors plus the training seed it recorded."""

    w1: torch.Tensor
    b1: torch.Tensor
    running_mean: torch.Tensor
    running_variance: torch.Tensor
    scale: torch.Tensor
    shift: torch.Tensor
    w2: torch.Tensor
    b2: torch.Tensor
    seed: int

    def __post_init__(self):
        hidden = self.w1.shape[1]
        expect = {
            "w1": (self.w1.shape[0], hidden),
            "b1": (hidden,),
            "running_mean": (hidden,),
            "running_variance": (hidden,),
            "scale": (hidden,),
            "shift": (hidden,),
            "w2": (hidden, self.w2.shape[1]),
            "b2": (self.w2.shape[1],),
        }
        for name, shape in expect.items():
            tensor = getattr(self, name)
            if tuple(tensor.shape) != shape:
                raise ValueError(f"{name} has shape {tuple(tensor.shape)}, expected {shape}")
            if tensor.dtype != torch.float64:
                raise ValueError(f"{name} must be float64, got {tensor.dtype}")
        if bool((self.running_variance < 0).any()):
            raise ValueError("running_variance must be nonnegative")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def class_count(self) -> int:
        return self.w2.shape[1]


class _Lines:
    """Parsed lines paired with their starting byte offsets."""

    def __init__(self, data: bytes, path):
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path} is not ASCII text", offset=exc.start) from exc
        self.entries = []
        offset = 0
        for raw in text.split("\n"):
            self.entries.append((offset, raw))
            offset += len(raw) + 1
        if self.entries and self.entries[-1][1] == "":
            self.entries.pop()  # the trailing-newline pseudo-line
        self.pos = 0
        self.path = path

    def take(self, what: str) -> str:
        if self.pos >= len(self.entries):
            end = self.entries[-1][0] + len(self.entries[-1][1]) if self.entries else 0
            raise FormatError(f"{self.path}: file ended before {what}", offset=end)
        offset, line = self.entries[self.pos]
        self.pos += 1
        if line == "":
            raise FormatError(f"{self.path}: blank line where {what} expected", offset=offset)
        return line

    def reject(self, message: str):
        offset = self.entries[self.pos - 1][0] if self.pos else 0
        raise FormatError(f"{self.path}: {message}", offset=offset)


def read_model(path) -> TorchClassifier:
    lines = _Lines(Path(path).read_bytes(), path)
    if lines.take("magic header") != MAGIC:
        lines.reject(f"not a {MAGIC!r} file")

    scalars = {}
    for key in _SCALARS:
        parts = lines.take(f"scalar {key}").split()
        if len(parts) != 2 or parts[0] != key:
            lines.reject(f"expected '{key} <integer>'")
        try:
            scalars[key] = int(parts[1])
        except ValueError:
            lines.reject(f"invalid integer {parts[1]!r} for {key}")
    if scalars["version"] != VERSION:
        lines.reject(f"unsupported version {scalars['version']}")

    shapes = {
        "w1": (scalars["input_dim"], scalars["hidden_dim"]),
        "b1": (scalars["hidden_dim"],),
        "running_mean": (scalars["hidden_dim"],),
        "running_variance": (scalars["hidden_dim"],),
        "scale": (scalars["hidden_dim"],),
        "shift": (scalars["hidden_dim"],),
        "w2": (scalars["hidden_dim"], scalars["class_count"]),
        "b2": (scalars["class_count"],),
    }
    arrays = {}
    for name in _ARRAYS:
        expect = shapes[name]
        parts = lines.take(f"array {name}").split()
        if parts[:2] != ["array", name] or len(parts) != 2 + len(expect):
            lines.reject(f"expected 'array {name} <dims>'")
        try:
            dims = tuple(int(tok) for tok in parts[2:])
        except ValueError:
            lines.reject(f"invalid dims for array {name}")
        if dims != expect:
            lines.reject(f"array {name} has dims {dims}, expected {expect}")
        rows = expect[0] if len(expect) == 2 else 1
        cols = expect[-1] if len(expect) == 2 else expect[0]
        values = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            tokens = lines.take(f"row {r} of {name}").split()
            if len(tokens) != cols:
                lines.reject(f"row {r} of {name} has {len(tokens)} values, expected {cols}")
            try:
                values[r] = [float(tok) for tok in tokens]
            except ValueError:
                lines.reject(f"non-numeric value in row {r} of {name}")
        squeezed = values if len(expect) == 2 else values[0]
        arrays[name] = torch.from_numpy(squeezed)

    if lines.pos != len(lines.entries):
        offset, line = lines.entries[lines.pos]
        raise FormatError(f"{path}: unexpected trailing content {line!r}", offset=offset)

    try:
        return TorchClassifier(seed=scalars["seed"], **arrays)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_model(model: TorchClassifier, path):
    """Emit the same document layout the harness writes, byte for byte."""
    out = [MAGIC]
    scalars = {
        "version": VERSION,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "class_count": model.class_count,
        "seed": model.seed,
    }
    for key in _SCALARS:
        out.append(f"{key} {scalars[key]}")
    for name in _ARRAYS:
        arr = getattr(model, name).detach().numpy()
        out.append(f"array {name} " + " ".join(str(d) for d in arr.shape))
        for row in arr if arr.ndim == 2 else arr[None, :]:
            out.append(" ".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(out) + "\n", encoding="ascii")


def as_input_batch(model: TorchClassifier, images) -> torch.Tensor:
    """Coerce (n, rows, cols) or (n, input_dim) images to a float64 batch tensor."""
    x = torch.as_tensor(images, dtype=torch.float64)
    if x.ndim == 3:
        # Explicit product: reshape(n, -1) is ambiguous for empty batches.
        x = x.reshape(x.shape[0], x.shape[1] * x.shape[2])
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(f"images incompatible with input_dim {model.input_dim}")
    return x


def hidden_preactivations(model: TorchClassifier, images) -> torch.Tensor:
    """Inputs to the normalization layer, the features its running stats describe."""
    return as_input_batch(model, images) @ model.w1 + model.b1


def class_logits(model: TorchClassifier, images) -> torch.Tensor:
    pre = hidden_preactivations(model, images)
    inv_std = torch.rsqrt(model.running_variance + NORM_EPS)
    normed = (pre - model.running_mean) * inv_std * model.scale + model.shift
    return torch.relu(normed) @ model.w2 + model.b2


def predict_proba(model: TorchClassifier, images) -> torch.Tensor:
    return torch.softmax(class_logits(model, images), dim=1)


def confidences(model: TorchClassifier, images) -> np.ndarray:
    """Max softmax probability per image, as a float64 numpy vector."""
    with torch.no_grad():
        return predict_proba(model, images).max(dim=1).values.numpy()
