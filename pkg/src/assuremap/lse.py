"""Active level-set sampling and the variance-penalized classifier.

The loop models the black-box accuracy function with the GP from
assuremap.gp, picks each next sample by maximizing the straddle score
1.96*sigma - |mu - h| over a seeded uniform candidate pool, and finally
labels any point positive iff mu - 2*sigma >= h. The whole run is a pure
function of (config, oracle, seed).
"""

from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from assuremap import gp as gp_core
from assuremap.errors import OracleError
from assuremap.space import DistortionLevel, SearchSpace

STRADDLE_WIDTH = 1.96   # 95% band half-width in the acquisition
DECISION_WIDTH = 2.0    # conservative band half-width in the classifier

IN_PROGRESS = "in-progress"
BUDGET_EXHAUSTED = "budget-exhausted"

# Fixed stream tags so the init sample, the per-step pools, and the random
# baseline draw from independent deterministic substreams of one seed.
_STREAM_INIT = 1
_STREAM_POOL = 2
_STREAM_BASELINE = 3


@dataclass(frozen=True)
class AssuranceRunConfig:
    threshold: float
    budget: int = 400
    init_points: int = 20
    seed: int = 0
    pool_size: int = 10_000
    refit_every: int = 10

    def __post_init__(self):
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.budget < 1 or self.init_points < 1:
            raise ValueError("budget and init_points must be positive")
        if self.init_points >= self.budget:
            raise ValueError(
                f"init_points {self.init_points} must be < budget {self.budget}"
            )
        if self.pool_size < 100:
            raise ValueError(f"pool_size must be >= 100, got {self.pool_size}")
        if self.refit_every < 1:
            raise ValueError("refit_every must be positive")


@dataclass(frozen=True)
class AssuranceRun:
    """Immutable snapshot of the sampling loop; observe() returns a new one."""

    config: AssuranceRunConfig
    space: SearchSpace
    history: Tuple[Tuple[DistortionLevel, float], ...]
    gp: gp_core.GPPosterior

    @classmethod
    def start(cls, config: AssuranceRunConfig, space: SearchSpace) -> "AssuranceRun":
        return cls(config, space, (), None)

    @property
    def status(self) -> str:
        return BUDGET_EXHAUSTED if len(self.history) >= self.config.budget else IN_PROGRESS

    def observed_arrays(self):
        xs = np.array([self.space.normalize(lvl) for lvl, _ in self.history])
        ys = np.array([y for _, y in self.history])
        return xs, ys


def straddle_score(mu, sigma, h):
    """1.96*sigma - |mu - h|; accepts scalars or arrays."""
    return STRADDLE_WIDTH * np.asarray(sigma) - np.abs(np.asarray(mu) - h)


def _pool_rng(config: AssuranceRunConfig, step: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, _STREAM_POOL, step])


def suggest_next(run: AssuranceRun) -> DistortionLevel:
    """Best straddle candidate from a seeded pool plus one refinement pass.

    The pool is uniform over the space; ties keep the lowest pool index. The
    refinement nudges the winner one coordinate at a time by +/-1% of each
    range (clipped to bounds), keeping strict improvements.
    """
    if run.gp is None:
        raise RuntimeError("suggest_next requires a fitted run (observe first)")
    if run.status != IN_PROGRESS:
        raise RuntimeError("run already exhausted its budget")
    cfg = run.config
    rng = _pool_rng(cfg, len(run.history))
    pool = rng.random((cfg.pool_size, run.space.ndim))

    def score_of(points):
        mu, s2 = run.gp.predict_batch(points)
        return straddle_score(mu, np.sqrt(s2), cfg.threshold)

    scores = score_of(pool)
    best_idx = int(np.argmax(scores))  # first maximum: lowest-index tie-break
    best = pool[best_idx].copy()
    best_score = scores[best_idx]

    for j in range(run.space.ndim):
        for delta in (0.01, -0.01):
            trial = best.copy()
            trial[j] = min(max(trial[j] + delta, 0.0), 1.0)
            trial_score = score_of(trial[None])[0]
            if trial_score > best_score:
                best, best_score = trial, trial_score
    return run.space.level_from_unit(best)


def observe(run: AssuranceRun, level: DistortionLevel, accuracy: float) -> AssuranceRun:
    """Record one oracle observation and refresh the GP.

    Hyperparameters are refit when the init block completes and every
    refit_every observations after that; other steps use a rank-1 update.
    """
    if run.status != IN_PROGRESS:
        raise RuntimeError(
            f"budget of {run.config.budget} observations already exhausted"
        )
    if not (0.0 <= accuracy <= 1.0):
        raise ValueError(f"accuracy {accuracy} outside [0, 1]")

    history = run.history + ((level, float(accuracy)),)
    t = len(history)
    x = run.space.normalize(level)

    init = run.config.init_points
    refit_hypers = t == init or (t > init and (t - init) % run.config.refit_every == 0)

    if run.gp is None:
        params = gp_core.default_kernel_params(run.space.ndim, [accuracy])
        posterior = gp_core.fit(x[None], [accuracy], params)
    elif refit_hypers:
        xs = np.concatenate([run.gp.inputs, x[None]])
        ys = np.concatenate([run.gp.targets, [accuracy]])
        params = gp_core.fit_hyperparameters(xs, ys)
        posterior = gp_core.fit(xs, ys, params)
    else:
        posterior = gp_core.update(run.gp, x, accuracy)
    return replace(run, history=history, gp=posterior)


def classify(run: AssuranceRun, level: DistortionLevel) -> int:
    """1 iff mu - 2*sigma >= threshold at the level."""
    labels, _, _ = classify_batch(run, run.space.normalize(level)[None])
    return int(labels[0])


def classify_batch(run: AssuranceRun, unit_points: np.ndarray):
    """Labels plus (mu, sigma) for normalized query points ((n, d))."""
    if run.gp is None:
        raise RuntimeError("classify requires a fitted run")
    mu, s2 = run.gp.predict_batch(unit_points)
    sigma = np.sqrt(s2)
    labels = (mu - DECISION_WIDTH * sigma >= run.config.threshold).astype(np.int64)
    return labels, mu, sigma


def run_lse(
    config: AssuranceRunConfig,
    oracle: Callable[[DistortionLevel], float],
    space: SearchSpace,
) -> AssuranceRun:
    """Drive the full budget: seeded uniform init, then straddle suggestions."""
    run = AssuranceRun.start(config, space)
    rng = np.random.default_rng([config.seed, _STREAM_INIT])
    init_unit = rng.random((config.init_points, space.ndim))

    def call_oracle(level):
        try:
            value = oracle(level)
        except Exception as exc:
            raise OracleError(
                f"oracle failed at {level.as_dict()} after "
                f"{len(run.history)} observations: {exc}",
                history=run.history,
            ) from exc
        return value

    for row in init_unit:
        level = space.level_from_unit(row)
        run = observe(run, level, call_oracle(level))
    while run.status == IN_PROGRESS:
        level = suggest_next(run)
        run = observe(run, level, call_oracle(level))
    return run
