"""Analytic accuracy surfaces with exactly known level sets.

These stand in for the expensive distort-and-evaluate oracle when exercising
the sampling loop: each surface maps a distortion level to [0, 1] in closed
form, and ships a labeler that decides f(c) >= h from the geometry of the
surface rather than by evaluating it, so tests get an independent truth path.
All formulas live in normalized [0, 1]^d coordinates and work for any
dimensionality of the owning space.

The surfaces are smooth with flat tops and steep-but-continuous shoulders,
like real accuracy surfaces (a model keeps its accuracy under small
distortion and degrades smoothly past a knee). Constants are chosen so the
h=0.85 boundary falls between the shells of the default 5-point evaluation
grid with a comfortable value margin on both sides.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from assuremap.space import DistortionLevel, SearchSpace

# Plateau: exactly 1.0 on a core box, decaying toward 0.5 with the Chebyshev
# gap to the core. At h=0.85 the level set is the core grown by PLATEAU_MARGIN
# per dim: the box [0.10, 0.70]^d.
PLATEAU_CORE = (0.20, 0.60)
PLATEAU_MARGIN = 0.10
PLATEAU_LOW = 0.5
_PLATEAU_WIDTH = PLATEAU_MARGIN / math.sqrt(math.log(1.0 / 0.7))

# Radial bump: flat-topped (fourth-power) bump at the cube center. At h=0.85
# the level set is the ball of radius ~0.30.
BUMP_CENTER = 0.5
BUMP_WIDTH = 0.2233

# Two lobes: a wide flat-topped bump and a narrow one; the level set is the
# union of two balls (radii ~0.40 and ~0.20 at h=0.85).
LOBE_A_CENTER = 0.25
LOBE_A_WIDTH = 0.3876
LOBE_B_CENTER = 0.75
LOBE_B_WIDTH = 0.10


@dataclass(frozen=True)
class BenchmarkSurface:
    """Closed-form oracle plus an analytic ground-truth labeler."""

    name: str
    space: SearchSpace
    _value: Callable[[np.ndarray], float]
    _label: Callable[[np.ndarray, float], int]

    def accuracy(self, level: DistortionLevel) -> float:
        return float(self._value(self.space.normalize(level)))

    def true_label(self, level: DistortionLevel, threshold: float) -> int:
        return int(self._label(self.space.normalize(level), threshold))

    def __call__(self, level: DistortionLevel) -> float:
        return self.accuracy(level)


def _core_gap(z) -> float:
    """Chebyshev distance from z to the plateau core box (0 inside)."""
    lo, hi = PLATEAU_CORE
    per_dim = np.maximum(np.maximum(lo - z, z - hi), 0.0)
    return float(per_dim.max())


def _plateau_value(z):
    gap = _core_gap(z)
    return PLATEAU_LOW + (1.0 - PLATEAU_LOW) * math.exp(-((gap / _PLATEAU_WIDTH) ** 2))


def _plateau_label(z, h):
    # f >= h iff gap <= width * sqrt(ln((1-low)/(h-low))); at h=0.85 that is
    # exactly PLATEAU_MARGIN, i.e. the box [0.10, 0.70]^d.
    if h <= PLATEAU_LOW:
        return 1
    if h > 1.0:
        return 0
    max_gap = _PLATEAU_WIDTH * math.sqrt(math.log((1.0 - PLATEAU_LOW) / (h - PLATEAU_LOW)))
    return int(_core_gap(z) <= max_gap)


def _bump_value_at(z, center, width) -> float:
    r2 = float(((z - center) ** 2).sum())
    return math.exp(-((r2 / width) ** 2))


def _bump_radius2(width, h) -> float:
    # f >= h iff ||z - center||^2 <= width * sqrt(ln(1/h)).
    return width * math.sqrt(math.log(1.0 / h))


def _bump_value(z):
    return _bump_value_at(z, BUMP_CENTER, BUMP_WIDTH)


def _bump_label(z, h):
    if h <= 0:
        return 1
    r2 = float(((z - BUMP_CENTER) ** 2).sum())
    return int(r2 <= _bump_radius2(BUMP_WIDTH, h))


def _two_lobe_value(z):
    return max(
        _bump_value_at(z, LOBE_A_CENTER, LOBE_A_WIDTH),
        _bump_value_at(z, LOBE_B_CENTER, LOBE_B_WIDTH),
    )


def _two_lobe_label(z, h):
    # The level set is the union of the two balls.
    if h <= 0:
        return 1
    qa = float(((z - LOBE_A_CENTER) ** 2).sum())
    qb = float(((z - LOBE_B_CENTER) ** 2).sum())
    return int(qa <= _bump_radius2(LOBE_A_WIDTH, h) or qb <= _bump_radius2(LOBE_B_WIDTH, h))


_REGISTRY = {
    "plateau": (_plateau_value, _plateau_label),
    "radial_bump": (_bump_value, _bump_label),
    "two_lobe": (_two_lobe_value, _two_lobe_label),
}

SURFACE_NAMES = tuple(_REGISTRY)


def benchmark_surface(name: str, space: SearchSpace) -> BenchmarkSurface:
    if name not in _REGISTRY:
        raise ValueError(f"unknown surface {name!r}; available: {SURFACE_NAMES}")
    value, label = _REGISTRY[name]
    return BenchmarkSurface(name, space, value, label)
