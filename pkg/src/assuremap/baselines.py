"""Random-sampling baseline for the directional comparisons.

Spends the same budget on uniform random levels, thresholds each observation,
and labels a query point by its nearest sampled neighbor (normalized
coordinates, lowest index on ties).
"""

import numpy as np

from assuremap.space import SearchSpace

_STREAM_BASELINE = 3


def random_baseline_labels(
    space: SearchSpace,
    oracle,
    budget: int,
    threshold: float,
    seed: int,
    unit_queries: np.ndarray,
) -> np.ndarray:
    """Predicted labels at normalized query points ((n, d))."""
    if budget < 1:
        raise ValueError("budget must be positive")
    rng = np.random.default_rng([seed, _STREAM_BASELINE])
    samples = rng.random((budget, space.ndim))
    observed = np.array(
        [oracle(space.level_from_unit(row)) for row in samples]
    )
    sample_labels = (observed >= threshold).astype(np.int64)

    queries = np.atleast_2d(np.asarray(unit_queries, dtype=np.float64))
    d2 = ((queries[:, None, :] - samples[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argmin(d2, axis=1)  # first minimum: lowest-index tie-break
    return sample_labels[nearest]
