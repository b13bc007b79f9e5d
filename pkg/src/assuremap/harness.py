"""Experiment pipeline: grid truth, F1 scoring, run persistence, reports.

run_experiment wires the pieces together. It builds the evaluation grid
(one oracle call per point, thresholded into ground-truth labels), drives
the sampling loop at the configured budget, classifies every grid point,
scores against truth, and persists a report under a directory named by
config hash and seed. Oracle calls are counted exactly: grid size + budget.
"""

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from assuremap import classifier, idx
from assuremap.dataset import AssuranceSet, few_shot_subset, merge_sets
from assuremap.distortion import DISTORTION_DOMAINS
from assuremap.errors import ConfigError, FormatError
from assuremap.lse import AssuranceRunConfig, classify_batch, run_lse
from assuremap.space import SearchSpace
from assuremap.space import default_search_space
from assuremap.surfaces import SURFACE_NAMES, benchmark_surface


@dataclass(frozen=True)
class EvaluationGrid:
    """Cartesian grid over the space with thresholded oracle truth."""

    space: SearchSpace
    points_per_dim: int
    unit_points: np.ndarray
    levels: np.ndarray
    values: np.ndarray
    truth: np.ndarray
    threshold: float


def build_grid(
    space: SearchSpace, points_per_dim: int, oracle: Callable, threshold: float
) -> EvaluationGrid:
    """Equispaced Cartesian product (endpoints included), lexicographic order.

    The first dimension is most significant; truth[i] = 1 iff the oracle
    accuracy at point i is >= threshold. One oracle call per point.
    """
    if points_per_dim < 2:
        raise ValueError(f"points_per_dim must be >= 2, got {points_per_dim}")
    axes = [np.linspace(0.0, 1.0, points_per_dim)] * space.ndim
    mesh = np.meshgrid(*axes, indexing="ij")
    unit = np.stack(mesh, axis=-1).reshape(-1, space.ndim)
    levels = space.denormalize(unit)
    values = np.empty(len(unit))
    for i, row in enumerate(unit):
        values[i] = oracle(space.level_from_unit(row))
    truth = (values >= threshold).astype(np.int64)
    return EvaluationGrid(
        space, points_per_dim, unit, levels, values, truth, float(threshold)
    )


def f1_score(truth, predicted) -> Tuple[float, float, float]:
    """(precision, recall, f1) for binary labels, with the 0/0 -> 0 convention."""
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape or truth.ndim != 1:
        raise ValueError(
            f"label vectors must be equal-length 1-D, got {truth.shape} vs {predicted.shape}"
        )
    for name, arr in (("truth", truth), ("predicted", predicted)):
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} labels must be 0 or 1")
    tp = int(np.sum((truth == 1) & (predicted == 1)))
    fp = int(np.sum((truth == 0) & (predicted == 1)))
    fn = int(np.sum((truth == 1) & (predicted == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


class OracleCounter:
    """Shared call counter; wrap every oracle that must be accounted for."""

    def __init__(self):
        self.calls = 0

    def wrap(self, fn: Callable) -> Callable:
        def counted(level):
            self.calls += 1
            return fn(level)

        return counted


def model_accuracy_oracle(model: classifier.MlpClassifier, aset: AssuranceSet) -> Callable:
    """The black-box f(c): model accuracy on the set distorted to level c."""
    if len(aset) == 0:
        raise ValueError("assurance set must be nonempty")

    def oracle(level):
        return classifier.evaluate_accuracy_at(model, aset, level)

    return oracle


def ingest_synthetic(set_path, model: classifier.MlpClassifier, alpha: float) -> AssuranceSet:
    """Load generated IDX images, keeping only those the model trusts.

    An image survives iff its max softmax probability is strictly above
    alpha; labels come from the companion label file.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    images_path, labels_path = idx.resolve_synthetic_paths(set_path)
    sset = idx.read_idx_pair(images_path, labels_path)
    if len(sset) == 0:
        return sset
    if int(sset.labels.max()) >= model.class_count:
        raise FormatError(
            f"{labels_path} contains label {int(sset.labels.max())}, model has "
            f"{model.class_count} classes"
        )
    confidence = classifier.predict_proba(model, sset.images).max(axis=1)
    keep = confidence > alpha
    return AssuranceSet(sset.images[keep], sset.labels[keep])


_CONFIG_DEFAULTS = {
    "surface": None,
    "model": None,
    "images": None,
    "labels": None,
    "dims": None,
    "threshold": None,
    "budget": 400,
    "init_points": 20,
    "seed": 0,
    "pool_size": 10_000,
    "refit_every": 10,
    "points_per_dim": 5,
    "few_shot": False,
    "per_class": 5,
    "synthetic": None,
    "alpha": 0.8,
}

_PATH_KEYS = ("model", "images", "labels", "synthetic")
_INT_KEYS = (
    "budget",
    "init_points",
    "seed",
    "pool_size",
    "refit_every",
    "points_per_dim",
    "per_class",
)


def load_config(path) -> dict:
    """Parse a JSON config; relative paths resolve against the file's directory."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a JSON object: {p}")
    for key in _PATH_KEYS:
        value = raw.get(key)
        if value and not Path(value).is_absolute():
            raw[key] = str(p.parent / value)
    return raw


def resolve_config(raw: Mapping, overrides: Optional[Mapping] = None) -> dict:
    """Fill defaults, apply CLI overrides, and validate; idempotent."""
    unknown = set(raw) - set(_CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = dict(_CONFIG_DEFAULTS)
    cfg.update(raw)
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                cfg[key] = value

    for key in _INT_KEYS:
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}")
    if not isinstance(cfg["few_shot"], bool):
        raise ConfigError(f"few_shot must be a boolean, got {cfg['few_shot']!r}")
    if not isinstance(cfg["alpha"], (int, float)) or not 0.0 <= cfg["alpha"] <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {cfg['alpha']!r}")

    if (cfg["surface"] is None) == (cfg["model"] is None):
        raise ConfigError("config must set exactly one of 'surface' or 'model'")
    if cfg["surface"] is not None:
        if cfg["surface"] not in SURFACE_NAMES:
            raise ConfigError(
                f"unknown surface {cfg['surface']!r}, choose from {SURFACE_NAMES}"
            )
        if cfg["few_shot"] or cfg["synthetic"]:
            raise ConfigError("few_shot/synthetic apply only to model configs")
        if cfg["threshold"] in (None, "auto"):
            raise ConfigError("surface configs need a numeric threshold")
    else:
        for key in ("images", "labels"):
            if not cfg[key]:
                raise ConfigError(f"model configs need '{key}'")
        for key in ("model", "images", "labels"):
            if not Path(cfg[key]).is_file():
                raise ConfigError(f"missing file for '{key}': {cfg[key]}")
        if cfg["synthetic"]:
            if not cfg["few_shot"]:
                raise ConfigError("synthetic ingestion requires few_shot mode")
            try:
                img_path, lbl_path = idx.resolve_synthetic_paths(cfg["synthetic"])
            except FormatError as exc:
                raise ConfigError(str(exc)) from exc
            for sp in (img_path, lbl_path):
                if not Path(sp).is_file():
                    raise ConfigError(f"missing synthetic file: {sp}")
        if cfg["threshold"] is None:
            cfg["threshold"] = "auto"

    if cfg["dims"] is not None:
        dims = list(cfg["dims"])
        bad = [d for d in dims if d not in DISTORTION_DOMAINS]
        if bad:
            raise ConfigError(f"unknown distortion dimensions: {bad}")
        if len(set(dims)) != len(dims):
            raise ConfigError(f"duplicate dimensions: {dims}")
        cfg["dims"] = dims
    if cfg["threshold"] != "auto":
        value = cfg["threshold"]
        if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise ConfigError(f"threshold must be 'auto' or in [0, 1], got {value!r}")
        cfg["threshold"] = float(value)
    return cfg


@dataclass(eq=False)
class AssuranceReport:
    """Everything a run produced: per-grid-point detail plus summary scores."""

    config: dict
    dim_names: Tuple[str, ...]
    levels: np.ndarray
    truth: np.ndarray
    predicted: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    precision: float
    recall: float
    f1: float
    oracle_calls: int
    wall_clock_seconds: float


def reports_equal(a: AssuranceReport, b: AssuranceReport, ignore_timing: bool = True) -> bool:
    same = (
        a.config == b.config
        and tuple(a.dim_names) == tuple(b.dim_names)
        and np.array_equal(a.levels, b.levels)
        and np.array_equal(a.truth, b.truth)
        and np.array_equal(a.predicted, b.predicted)
        and np.array_equal(a.mu, b.mu)
        and np.array_equal(a.sigma, b.sigma)
        and (a.precision, a.recall, a.f1) == (b.precision, b.recall, b.f1)
        and a.oracle_calls == b.oracle_calls
    )
    if not ignore_timing:
        same = same and a.wall_clock_seconds == b.wall_clock_seconds
    return same


def run_dir_name(snapshot: Mapping) -> str:
    hashed = {k: v for k, v in snapshot.items() if k != "seed"}
    digest = hashlib.sha256(json.dumps(hashed, sort_keys=True).encode()).hexdigest()
    return f"{digest[:12]}-s{snapshot['seed']}"


def prepare_experiment(cfg: Mapping):
    """Resolve a config into (space, threshold, truth oracle, run oracle).

    Grid truth always comes from the full assurance set (or the surface
    itself); few-shot subsets and ingested synthetic images only feed the
    sampling oracle.
    """
    space = default_search_space(cfg["dims"])
    if cfg["surface"] is not None:
        surface = benchmark_surface(cfg["surface"], space)
        return space, float(cfg["threshold"]), surface.accuracy, surface.accuracy

    model = classifier.import_model(cfg["model"])
    full = idx.read_idx_pair(cfg["images"], cfg["labels"])
    if len(full) == 0:
        raise ConfigError(f"empty assurance set: {cfg['images']}")
    if int(full.labels.max()) >= model.class_count:
        raise ConfigError("assurance labels exceed the model's class count")
    threshold = cfg["threshold"]
    if threshold == "auto":
        threshold = classifier.evaluate_accuracy(model, full) - 0.05
    truth_fn = model_accuracy_oracle(model, full)
    run_set = full
    if cfg["few_shot"]:
        run_set = few_shot_subset(full, cfg["per_class"], cfg["seed"])
        if cfg["synthetic"]:
            extra = ingest_synthetic(cfg["synthetic"], model, cfg["alpha"])
            run_set = merge_sets(run_set, extra)
    return space, float(threshold), truth_fn, model_accuracy_oracle(model, run_set)


def run_experiment(config: Mapping, out_dir) -> Tuple[AssuranceReport, Path]:
    """Full pipeline: truth grid, budgeted sampling run, scoring, persistence."""
    cfg = resolve_config(config)
    t0 = time.perf_counter()
    space, threshold, truth_fn, run_fn = prepare_experiment(cfg)

    counter = OracleCounter()
    grid = build_grid(space, cfg["points_per_dim"], counter.wrap(truth_fn), threshold)
    try:
        run_cfg = AssuranceRunConfig(
            threshold=threshold,
            budget=cfg["budget"],
            init_points=cfg["init_points"],
            seed=cfg["seed"],
            pool_size=cfg["pool_size"],
            refit_every=cfg["refit_every"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    run = run_lse(run_cfg, counter.wrap(run_fn), space)
    predicted, mu, sigma = classify_batch(run, grid.unit_points)
    precision, recall, f1 = f1_score(grid.truth, predicted)

    snapshot = dict(cfg)
    snapshot["threshold"] = threshold
    snapshot["dims"] = list(space.names)
    report = AssuranceReport(
        config=snapshot,
        dim_names=space.names,
        levels=grid.levels,
        truth=grid.truth,
        predicted=predicted,
        mu=mu,
        sigma=sigma,
        precision=precision,
        recall=recall,
        f1=f1,
        oracle_calls=counter.calls,
        wall_clock_seconds=time.perf_counter() - t0,
    )

    run_dir = Path(out_dir) / run_dir_name(snapshot)
    run_dir.mkdir(parents=True, exist_ok=True)
    report_emit(report, "json", run_dir / "report.json")
    report_emit(report, "csv", run_dir / "grid.csv")
    (run_dir / "config.json").write_text(
        json.dumps(snapshot, sort_keys=True, indent=2) + "\n"
    )
    return report, run_dir


def report_emit(report: AssuranceReport, fmt: str, path) -> Path:
    """Write the report as JSON (full mirror) or CSV (one row per grid point)."""
    path = Path(path)
    if fmt == "json":
        doc = {
            "config": report.config,
            "dim_names": list(report.dim_names),
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "oracle_calls": report.oracle_calls,
            "wall_clock_seconds": report.wall_clock_seconds,
            "levels": report.levels.tolist(),
            "truth": report.truth.tolist(),
            "predicted": report.predicted.tolist(),
            "mu": report.mu.tolist(),
            "sigma": report.sigma.tolist(),
        }
        path.write_text(json.dumps(doc, sort_keys=True) + "\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([*report.dim_names, "truth", "pred", "mu", "sigma"])
            for lvl, t, p, m, s in zip(
                report.levels, report.truth, report.predicted, report.mu, report.sigma
            ):
                writer.writerow(
                    [
                        *(repr(float(v)) for v in lvl),
                        int(t),
                        int(p),
                        repr(float(m)),
                        repr(float(s)),
                    ]
                )
    else:
        raise ValueError(f"unknown report format {fmt!r}, use 'json' or 'csv'")
    return path


def report_load(path) -> AssuranceReport:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid report JSON in {p}: {exc}") from exc
    try:
        return AssuranceReport(
            config=doc["config"],
            dim_names=tuple(doc["dim_names"]),
            levels=np.asarray(doc["levels"], dtype=np.float64),
            truth=np.asarray(doc["truth"], dtype=np.int64),
            predicted=np.asarray(doc["predicted"], dtype=np.int64),
            mu=np.asarray(doc["mu"], dtype=np.float64),
            sigma=np.asarray(doc["sigma"], dtype=np.float64),
            precision=doc["precision"],
            recall=doc["recall"],
            f1=doc["f1"],
            oracle_calls=doc["oracle_calls"],
            wall_clock_seconds=doc["wall_clock_seconds"],
        )
    except KeyError as exc:
        raise FormatError(f"report {p} missing field {exc}") from exc


def read_grid_csv(path):
    """Parse an emitted CSV back into (dim_names, levels, truth, pred, mu, sigma)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-4:] != ["truth", "pred", "mu", "sigma"]:
        raise FormatError(f"{path} is not a grid CSV")
    names = tuple(rows[0][:-4])
    d = len(names)
    data = rows[1:]
    levels = np.array([[float(v) for v in r[:d]] for r in data], dtype=np.float64)
    truth = np.array([int(r[d]) for r in data], dtype=np.int64)
    pred = np.array([int(r[d + 1]) for r in data], dtype=np.int64)
    mu = np.array([float(r[d + 2]) for r in data], dtype=np.float64)
    sigma = np.array([float(r[d + 3]) for r in data], dtype=np.float64)
    return names, levels, truth, pred, mu, sigma
