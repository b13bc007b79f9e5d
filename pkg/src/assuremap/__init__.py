"""Assurance maps for image classifiers under parametric distortion.

Given a trained classifier and a family of image distortions, the package
actively samples the distortion space with a GP surrogate and labels every
region by whether model accuracy stays above a threshold.
"""

__version__ = "0.1.0"

from assuremap.dataset import AssuranceSet, few_shot_subset, merge_sets
from assuremap.distortion import apply_distortion, distort_set
from assuremap.errors import ConfigError, FormatError, NumericalError, OracleError
from assuremap.lse import AssuranceRun, AssuranceRunConfig, run_lse, straddle_score
from assuremap.space import DistortionLevel, SearchSpace, default_search_space

__all__ = [
    "AssuranceRun",
    "AssuranceRunConfig",
    "AssuranceSet",
    "ConfigError",
    "DistortionLevel",
    "FormatError",
    "NumericalError",
    "OracleError",
    "SearchSpace",
    "apply_distortion",
    "default_search_space",
    "distort_set",
    "few_shot_subset",
    "merge_sets",
    "run_lse",
    "straddle_score",
    "__version__",
]
