"""Classifier under test: one-hidden-layer MLP with a normalization layer.

Forward pass: flatten -> linear -> feature normalization -> ReLU -> linear
-> softmax. The normalization layer standardizes each hidden feature; during
training it uses batch statistics and maintains running estimates, during
inference it uses the running estimates. Running mean/variance use population
(biased) batch variance and momentum updates.

Models round-trip through a plain-text format (see docs/model_format.md) so
other tools can consume them without unpickling anything.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from assuremap.dataset import AssuranceSet
from assuremap.distortion import distort_set
from assuremap.errors import FormatError

NORM_EPS = 1e-5
RUNNING_STAT_MOMENTUM = 0.9
FORMAT_MAGIC = "assuremap-model"
FORMAT_VERSION = 1

_SIG_DIGITS = ".17g"
_RNG_TAG = 0xC1A5


@dataclass(frozen=True)
class MlpClassifier:
    """Trained weights plus normalization-layer state."""

    w1: np.ndarray
    b1: np.ndarray
    running_mean: np.ndarray
    running_variance: np.ndarray
    scale: np.ndarray
    shift: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
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
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if arr.dtype != np.float64:
                raise ValueError(f"{name} must be float64, got {arr.dtype}")
        if np.any(self.running_variance < 0):
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


@dataclass(frozen=True)
class TrainConfig:
    hidden_dim: int = 64
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.hidden_dim <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("hidden_dim, epochs, batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")


def _flatten(images: np.ndarray, input_dim: int) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 3:
        x = x.reshape(x.shape[0], -1)
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ValueError(f"images incompatible with input_dim {input_dim}")
    return x


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def hidden_preactivations(model: MlpClassifier, images: np.ndarray) -> np.ndarray:
    """Inputs to the normalization layer, the quantity its running stats track."""
    x = _flatten(images, model.input_dim)
    return x @ model.w1 + model.b1


def predict_proba(model: MlpClassifier, images: np.ndarray) -> np.ndarray:
    pre = hidden_preactivations(model, images)
    inv_std = 1.0 / np.sqrt(model.running_variance + NORM_EPS)
    normed = (pre - model.running_mean) * inv_std * model.scale + model.shift
    hidden = np.maximum(normed, 0.0)
    return _softmax(hidden @ model.w2 + model.b2)


def predict(model: MlpClassifier, images: np.ndarray) -> np.ndarray:
    return np.argmax(predict_proba(model, images), axis=1)


def evaluate_accuracy(model: MlpClassifier, aset: AssuranceSet) -> float:
    return float(np.mean(predict(model, aset.images) == aset.labels))


def evaluate_accuracy_at(model: MlpClassifier, aset: AssuranceSet, level) -> float:
    """Accuracy on the set distorted to `level`: the assurance oracle f(c)."""
    return evaluate_accuracy(model, distort_set(aset, level))


def train_model(train_set: AssuranceSet, config: TrainConfig = TrainConfig()) -> MlpClassifier:
    """Minibatch SGD on cross-entropy; deterministic given config.seed."""
    rng = np.random.default_rng([config.seed, _RNG_TAG])
    x_all = train_set.images.reshape(len(train_set), -1)
    y_all = train_set.labels
    n, input_dim = x_all.shape
    hidden = config.hidden_dim
    classes = int(y_all.max()) + 1 if len(y_all) else 0
    if classes < 2:
        raise ValueError("training set must contain at least two classes")

    w1 = rng.normal(0.0, np.sqrt(2.0 / input_dim), size=(input_dim, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, classes))
    b2 = np.zeros(classes)
    scale = np.ones(hidden)
    shift = np.zeros(hidden)
    run_mean = np.zeros(hidden)
    run_var = np.ones(hidden)

    lr = config.learning_rate
    m = RUNNING_STAT_MOMENTUM
    onehot = np.eye(classes)[y_all]

    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            x = x_all[batch]
            t = onehot[batch]
            bsz = len(batch)

            pre = x @ w1 + b1
            mu = pre.mean(axis=0)
            var = pre.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + NORM_EPS)
            xhat = (pre - mu) * inv_std
            normed = xhat * scale + shift
            hid = np.maximum(normed, 0.0)
            probs = _softmax(hid @ w2 + b2)

            run_mean = m * run_mean + (1.0 - m) * mu
            run_var = m * run_var + (1.0 - m) * var

            dlogits = (probs - t) / bsz
            dw2 = hid.T @ dlogits
            db2 = dlogits.sum(axis=0)
            dhid = dlogits @ w2.T
            dnormed = dhid * (normed > 0.0)
            dscale = (dnormed * xhat).sum(axis=0)
            dshift = dnormed.sum(axis=0)
            dxhat = dnormed * scale
            # Batch-norm backprop through the batch mean and variance.
            dpre = (
                inv_std
                / bsz
                * (bsz * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
            )
            dw1 = x.T @ dpre
            db1 = dpre.sum(axis=0)

            w2 -= lr * dw2
            b2 -= lr * db2
            scale -= lr * dscale
            shift -= lr * dshift
            w1 -= lr * dw1
            b1 -= lr * db1

    return MlpClassifier(
        w1=w1,
        b1=b1,
        running_mean=run_mean,
        running_variance=run_var,
        scale=scale,
        shift=shift,
        w2=w2,
        b2=b2,
        seed=config.seed,
    )


_SCALAR_KEYS = ("version", "input_dim", "hidden_dim", "class_count", "seed")
_ARRAY_ORDER = ("w1", "b1", "running_mean", "running_variance", "scale", "shift", "w2", "b2")


def _fmt(value: float) -> str:
    return format(value, _SIG_DIGITS)


def export_model(model: MlpClassifier, path):
    """Write the plain-text model document (17 significant digits)."""
    lines = [FORMAT_MAGIC]
    scalars = {
        "version": FORMAT_VERSION,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "class_count": model.class_count,
        "seed": model.seed,
    }
    for key in _SCALAR_KEYS:
        lines.append(f"{key} {scalars[key]}")
    for name in _ARRAY_ORDER:
        arr = getattr(model, name)
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"array {name} {dims}")
        rows = arr if arr.ndim == 2 else arr[None, :]
        for row in rows:
            lines.append(" ".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


class _LineCursor:
    """Line reader that reports the byte offset of the current line."""

    def __init__(self, data: bytes, path):
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path} is not ASCII text", offset=exc.start) from exc
        self.lines = []
        offset = 0
        for raw in text.split("\n"):
            self.lines.append((offset, raw))
            offset += len(raw) + 1
        # A trailing newline leaves one empty pseudo-line; drop it.
        if self.lines and self.lines[-1][1] == "":
            self.lines.pop()
        self.pos = 0
        self.path = path

    def next_line(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise FormatError(
                f"{self.path}: unexpected end of file, expected {what}",
                offset=self.lines[-1][0] + len(self.lines[-1][1]) if self.lines else 0,
            )
        offset, line = self.lines[self.pos]
        self.pos += 1
        if line == "":
            raise FormatError(f"{self.path}: blank line where {what} expected", offset=offset)
        return line

    def fail(self, message: str):
        offset = self.lines[self.pos - 1][0] if self.pos > 0 else 0
        raise FormatError(f"{self.path}: {message}", offset=offset)


def _parse_int(cursor: _LineCursor, token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        cursor.fail(f"invalid integer {token!r} for {what}")


def import_model(path) -> MlpClassifier:
    cursor = _LineCursor(Path(path).read_bytes(), path)

    magic = cursor.next_line("header")
    if magic != FORMAT_MAGIC:
        cursor.fail(f"bad header {magic!r}, expected {FORMAT_MAGIC!r}")

    scalars = {}
    for key in _SCALAR_KEYS:
        line = cursor.next_line(f"scalar {key}")
        parts = line.split()
        if len(parts) != 2 or parts[0] != key:
            cursor.fail(f"expected '{key} <value>', got {line!r}")
        scalars[key] = _parse_int(cursor, parts[1], key)
    if scalars["version"] != FORMAT_VERSION:
        cursor.fail(f"unsupported version {scalars['version']}")

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
    for name in _ARRAY_ORDER:
        expect = shapes[name]
        line = cursor.next_line(f"array {name}")
        parts = line.split()
        if len(parts) < 3 or parts[0] != "array" or parts[1] != name:
            cursor.fail(f"expected 'array {name} <dims>', got {line!r}")
        dims = tuple(_parse_int(cursor, tok, f"{name} dims") for tok in parts[2:])
        if dims != expect:
            cursor.fail(f"array {name} has dims {dims}, expected {expect}")
        rows = expect[0] if len(expect) == 2 else 1
        cols = expect[1] if len(expect) == 2 else expect[0]
        out = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            row_line = cursor.next_line(f"row {r} of {name}")
            tokens = row_line.split()
            if len(tokens) != cols:
                cursor.fail(f"row {r} of {name} has {len(tokens)} values, expected {cols}")
            try:
                out[r] = [float(tok) for tok in tokens]
            except ValueError:
                cursor.fail(f"non-numeric value in row {r} of {name}")
        arrays[name] = out if len(expect) == 2 else out[0]

    if cursor.pos != len(cursor.lines):
        offset, line = cursor.lines[cursor.pos]
        raise FormatError(
            f"{path}: unexpected trailing content {line!r}", offset=offset
        )

    try:
        return MlpClassifier(seed=scalars["seed"], **arrays)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
