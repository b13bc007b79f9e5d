"""Exact Gaussian-process regression over normalized distortion coordinates.

Squared-exponential kernel with one lengthscale per input dimension, constant
prior mean at the sample mean of the targets, Gaussian noise folded into the
factorized matrix. The posterior keeps a lower Cholesky factor of
K + (noise_variance + jitter) I, so predictions are O(t) for the mean and
O(t^2) for the variance, and conditioning on one more observation is a rank-1
factor extension instead of a refit.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from assuremap import backend
from assuremap.errors import NumericalError

_JITTER_LADDER = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4)
JITTER_START = _JITTER_LADDER[0]
JITTER_MAX = _JITTER_LADDER[-1]

DEFAULT_LENGTHSCALE = 0.2
DEFAULT_NOISE_VARIANCE = 1e-4
SIGNAL_VARIANCE_FLOOR = 1e-4


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential hyperparameters in normalized-coordinate units."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=np.float64))
        if ls.ndim != 1 or np.any(ls <= 0) or not np.all(np.isfinite(ls)):
            raise ValueError(f"lengthscales must be positive reals, got {ls}")
        if not (self.signal_variance > 0 and math.isfinite(self.signal_variance)):
            raise ValueError(f"signal_variance must be > 0, got {self.signal_variance}")
        if not (self.noise_variance >= 0 and math.isfinite(self.noise_variance)):
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))


def default_kernel_params(ndim: int, targets=None) -> KernelParams:
    """Fallback hyperparameters used when fitting is skipped (t < 5)."""
    sv = SIGNAL_VARIANCE_FLOOR
    if targets is not None and len(targets) > 1:
        sv = max(float(np.var(np.asarray(targets, dtype=np.float64))), sv)
    return KernelParams(
        np.full(ndim, DEFAULT_LENGTHSCALE), sv, DEFAULT_NOISE_VARIANCE
    )


def kernel_eval(a, b, params: KernelParams) -> float:
    """k(a, b) for two points in normalized coordinates."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.shape != params.lengthscales.shape:
        raise ValueError(
            f"dimension mismatch: a {a.shape}, b {b.shape}, "
            f"lengthscales {params.lengthscales.shape}"
        )
    q = np.sum(((a - b) / params.lengthscales) ** 2)
    return float(params.signal_variance * math.exp(-0.5 * q))


@dataclass(frozen=True)
class GPPosterior:
    """Immutable posterior; predict is safe to call from many threads."""

    inputs: np.ndarray       # (t, d) normalized coordinates
    targets: np.ndarray      # (t,) observed values in [0, 1]
    kernel: KernelParams
    chol_factor: np.ndarray  # lower factor of K + (noise_variance + jitter) I
    alpha: np.ndarray        # (K + ...)^{-1} (targets - prior_mean)
    prior_mean: float
    jitter: float

    @property
    def num_points(self) -> int:
        return len(self.targets)

    def predict(self, x) -> Tuple[float, float]:
        mu, s2 = self.predict_batch(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        return float(mu[0]), float(s2[0])

    def predict_batch(self, xs) -> Tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at each row of xs ((n, d))."""
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.inputs.shape[1]:
            raise ValueError(
                f"expected (n, {self.inputs.shape[1]}) query array, got {xs.shape}"
            )
        k_cross = backend.rbf_cross(
            self.inputs, xs, self.kernel.lengthscales, self.kernel.signal_variance
        )  # (t, n)
        mu = self.prior_mean + k_cross.T @ self.alpha
        v = solve_triangular(self.chol_factor, k_cross, lower=True, check_finite=False)
        s2 = self.kernel.signal_variance - np.einsum("ij,ij->j", v, v)
        np.clip(s2, 0.0, None, out=s2)
        return mu, s2


def _validate_data(inputs, targets):
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64).ravel()
    if inputs.ndim != 2 or len(inputs) != len(targets) or len(targets) < 1:
        raise ValueError(
            f"need matching (t, d) inputs and (t,) targets with t >= 1, "
            f"got {inputs.shape} and {targets.shape}"
        )
    if np.any(targets < 0.0) or np.any(targets > 1.0):
        raise ValueError("targets must lie in [0, 1]")
    return inputs, targets


def _factorize(k_matrix: np.ndarray, noise_variance: float):
    """Cholesky with escalating jitter; raises NumericalError when exhausted."""
    t = k_matrix.shape[0]
    for jitter in _JITTER_LADDER:
        try:
            chol = np.linalg.cholesky(
                k_matrix + (noise_variance + jitter) * np.eye(t)
            )
            return chol, jitter
        except np.linalg.LinAlgError:
            pass
    raise NumericalError(
        f"Cholesky factorization failed at jitter {JITTER_MAX:g}",
        jitter=JITTER_MAX,
    )


def fit(inputs, targets, kernel: KernelParams) -> GPPosterior:
    inputs, targets = _validate_data(inputs, targets)
    if inputs.shape[1] != len(kernel.lengthscales):
        raise ValueError(
            f"inputs have {inputs.shape[1]} dims but kernel has "
            f"{len(kernel.lengthscales)} lengthscales"
        )
    k_matrix = backend.rbf_cross(
        inputs, inputs, kernel.lengthscales, kernel.signal_variance
    )
    chol, jitter = _factorize(k_matrix, kernel.noise_variance)
    prior_mean = float(np.mean(targets))
    alpha = cho_solve((chol, True), targets - prior_mean, check_finite=False)
    return GPPosterior(inputs, targets, kernel, chol, alpha, prior_mean, jitter)


def update(gp: GPPosterior, x, y: float) -> GPPosterior:
    """Condition on one more observation; equivalent to a full refit.

    Extends the Cholesky factor by one row (exact algebra on the same
    matrix), then recomputes the prior mean and weights over all targets.
    Falls back to fit() if the extension is numerically degenerate.
    """
    if not (0.0 <= y <= 1.0):
        raise ValueError(f"target {y} outside [0, 1]")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape != (1, gp.inputs.shape[1]):
        raise ValueError(f"expected one {gp.inputs.shape[1]}-dim point, got {x.shape}")

    inputs = np.concatenate([gp.inputs, x])
    targets = np.concatenate([gp.targets, [float(y)]])

    k_vec = backend.rbf_cross(
        gp.inputs, x, gp.kernel.lengthscales, gp.kernel.signal_variance
    )[:, 0]
    row = solve_triangular(gp.chol_factor, k_vec, lower=True, check_finite=False)
    corner2 = (
        gp.kernel.signal_variance
        + gp.kernel.noise_variance
        + gp.jitter
        - row @ row
    )
    if corner2 <= 1e-12:
        return fit(inputs, targets, gp.kernel)

    t = gp.num_points
    chol = np.zeros((t + 1, t + 1))
    chol[:t, :t] = gp.chol_factor
    chol[t, :t] = row
    chol[t, t] = math.sqrt(corner2)

    prior_mean = float(np.mean(targets))
    alpha = cho_solve((chol, True), targets - prior_mean, check_finite=False)
    return GPPosterior(inputs, targets, gp.kernel, chol, alpha, prior_mean, gp.jitter)


def log_marginal_likelihood(inputs, targets, kernel: KernelParams) -> float:
    """Exact LML under the constant-sample-mean prior; -inf if not factorizable."""
    inputs, targets = _validate_data(inputs, targets)
    k_matrix = backend.rbf_cross(
        inputs, inputs, kernel.lengthscales, kernel.signal_variance
    )
    try:
        chol, _ = _factorize(k_matrix, kernel.noise_variance)
    except NumericalError:
        return -math.inf
    resid = targets - np.mean(targets)
    alpha = cho_solve((chol, True), resid, check_finite=False)
    t = len(targets)
    return float(
        -0.5 * resid @ alpha
        - np.sum(np.log(np.diag(chol)))
        - 0.5 * t * math.log(2.0 * math.pi)
    )


_LS_GRID = (0.05, 0.1, 0.2, 0.4, 0.8)
_NOISE_GRID = (1e-6, 1e-4, 1e-2)
_SV_SCALE_GRID = (0.5, 1.0, 2.0)
_LS_BOUNDS = (0.01, 10.0)
_SV_BOUNDS = (1e-6, 25.0)
_NOISE_BOUNDS = (1e-8, 1.0)
_SEARCH_FACTORS = (2.0, 1.4, 1.15)


def fit_hyperparameters(inputs, targets) -> KernelParams:
    """Maximize the LML over a fixed grid plus coordinate-wise local search.

    Fully deterministic: candidates are scanned in a fixed order and ties keep
    the earliest candidate. With fewer than 5 observations returns the
    documented defaults instead.
    """
    inputs, targets = _validate_data(inputs, targets)
    ndim = inputs.shape[1]
    if len(targets) < 5:
        return default_kernel_params(ndim, targets)

    sv_base = max(float(np.var(targets)), SIGNAL_VARIANCE_FLOOR)

    def score(ls_vec, sv, noise):
        params = KernelParams(ls_vec, sv, noise)
        return log_marginal_likelihood(inputs, targets, params), params

    best_lml = -math.inf
    best = None
    for ls in _LS_GRID:
        for sv_scale in _SV_SCALE_GRID:
            for noise in _NOISE_GRID:
                lml, params = score(np.full(ndim, ls), sv_base * sv_scale, noise)
                if lml > best_lml:
                    best_lml, best = lml, params
    if best is None:
        return default_kernel_params(ndim, targets)

    # Coordinate search in log space: each round tries shrinking/growing one
    # parameter at a time by a fixed factor, keeping strict improvements.
    ls_vec = best.lengthscales.copy()
    sv = best.signal_variance
    noise = best.noise_variance
    for factor in _SEARCH_FACTORS:
        for j in range(ndim):
            for trial in (ls_vec[j] * factor, ls_vec[j] / factor):
                trial = min(max(trial, _LS_BOUNDS[0]), _LS_BOUNDS[1])
                cand = ls_vec.copy()
                cand[j] = trial
                lml, params = score(cand, sv, noise)
                if lml > best_lml:
                    best_lml, best, ls_vec = lml, params, cand
        for trial in (sv * factor, sv / factor):
            trial = min(max(trial, _SV_BOUNDS[0]), _SV_BOUNDS[1])
            lml, params = score(ls_vec, trial, noise)
            if lml > best_lml:
                best_lml, best, sv = lml, params, trial
        for trial in (noise * factor, noise / factor):
            trial = min(max(trial, _NOISE_BOUNDS[0]), _NOISE_BOUNDS[1])
            lml, params = score(ls_vec, sv, trial)
            if lml > best_lml:
                best_lml, best, noise = lml, params, trial
    return best
