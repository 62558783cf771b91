"""Monotone regression from unlinked covariate and response samples."""

from .baselines import cs_estimator, deconv_cdf, pava, quantile_match
from .errors import (
    AccuracyError,
    ConfigError,
    DataError,
    EmptyInputError,
    NumericFailure,
    UnlinkedIsoError,
)
# ``fit`` and ``objective`` stay module-level names so the submodules are not shadowed
from .fit import FitConfig, FitResult, default_eps, fit_with_trace_check
from .noise import NoiseModel, laplace_from_variance, linked_residuals, longitudinal_residuals
from .objective import (
    GroupedLevels,
    QuadratureConfig,
    fenchel_residuals,
    gradient,
    gradient_empirical,
    mixture_cdf,
)
from .stepfn import StepFunction, ecdf, from_fitted, generalized_inverse, l2_distance_sq, pushforward_ecdf

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConfigError",
    "DataError",
    "EmptyInputError",
    "FitConfig",
    "FitResult",
    "GroupedLevels",
    "NoiseModel",
    "NumericFailure",
    "QuadratureConfig",
    "StepFunction",
    "UnlinkedIsoError",
    "cs_estimator",
    "deconv_cdf",
    "default_eps",
    "ecdf",
    "fenchel_residuals",
    "fit_with_trace_check",
    "from_fitted",
    "generalized_inverse",
    "gradient",
    "gradient_empirical",
    "l2_distance_sq",
    "laplace_from_variance",
    "linked_residuals",
    "longitudinal_residuals",
    "mixture_cdf",
    "pava",
    "pushforward_ecdf",
    "quantile_match",
]
