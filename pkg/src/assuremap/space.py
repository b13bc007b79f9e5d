"""The distortion search space and points within it.

All sampling and GP modeling happens in normalized [0, 1]^d coordinates; a
SearchSpace owns the affine mapping between those and native units (degrees,
ratios, fractions). Dimension names must come from the distortion registry
and bounds must sit inside the registry domains.
"""

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Tuple

import numpy as np

from assuremap.distortion import DISTORTION_DOMAINS


@dataclass(frozen=True)
class DistortionLevel:
    """One point of the search space, in native units."""

    names: Tuple[str, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values must have equal length")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class SearchSpace:
    """Ordered (name, lower, upper) axes spanning the distortion levels."""

    dims: Tuple[Tuple[str, float, float], ...]

    def __post_init__(self):
        dims = tuple((str(n), float(lo), float(hi)) for n, lo, hi in self.dims)
        names = [n for n, _, _ in dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names in {names}")
        for name, lo, hi in dims:
            if name not in DISTORTION_DOMAINS:
                raise ValueError(f"unknown distortion {name!r}")
            dlo, dhi = DISTORTION_DOMAINS[name]
            if not (dlo <= lo < hi <= dhi):
                raise ValueError(
                    f"bounds [{lo}, {hi}] for {name} invalid or outside "
                    f"registry domain [{dlo}, {dhi}]"
                )
        object.__setattr__(self, "dims", dims)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _, _ in self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for _, lo, _ in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, _, hi in self.dims])

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def level(self, values: Iterable[float]) -> DistortionLevel:
        values = tuple(float(v) for v in values)
        if len(values) != self.ndim:
            raise ValueError(f"expected {self.ndim} values, got {len(values)}")
        lower, upper = self.lower, self.upper
        for v, lo, hi, (name, _, _) in zip(values, lower, upper, self.dims):
            if not (lo <= v <= hi):
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
        return DistortionLevel(self.names, values)

    def normalize(self, values) -> np.ndarray:
        """Native units -> [0, 1]^d. Accepts a level, a vector, or an array."""
        if isinstance(values, DistortionLevel):
            values = values.values
        arr = np.asarray(values, dtype=np.float64)
        return (arr - self.lower) / (self.upper - self.lower)

    def denormalize(self, unit) -> np.ndarray:
        arr = np.asarray(unit, dtype=np.float64)
        return self.lower + arr * (self.upper - self.lower)

    def level_from_unit(self, unit) -> DistortionLevel:
        return self.level(self.denormalize(unit))


def default_search_space(names: Sequence[str] = None) -> SearchSpace:
    """The full registry domains, optionally restricted to a subset of axes."""
    if names is None:
        names = tuple(DISTORTION_DOMAINS)
    return SearchSpace(tuple((n, *DISTORTION_DOMAINS[n]) for n in names))
