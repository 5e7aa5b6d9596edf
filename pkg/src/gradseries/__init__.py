"""SmoothGrad/VarGrad saliency attribution: Monte Carlo estimators and their
analytic higher-order-derivative series forms, with remainder bounds.

The two routes to the same quantities are deliberately independent so that
they can check each other: `estimators` samples, `series` evaluates closed
forms from a derivative table, and `oracle` provides exact ground truth for
polynomial score functions.
"""

from .errors import (
    ConfigError,
    DimensionMismatchError,
    EnumerationCapError,
    GradSeriesError,
    NumericError,
    ParseError,
    UsageError,
)
from .estimators import (
    AttributionVector,
    NoiseSpec,
    derive_seed,
    gaussian_noise,
    mc_attributions,
    paired_run,
    smoothgrad_mc,
    split_affine,
    vargrad_mc,
)
from .exprlang import ScoreFunction, degree, evaluate, parse, serialize
from .jets import (
    DerivativeTable,
    derivative_table,
    fd_partial,
    saliency,
    saliency_partial,
)
from .oracle import check_cov_bound, check_variance_bound, exact_smoothgrad, exact_vargrad
from .series import (
    Ball,
    SeriesEvaluation,
    VarGradRemainder,
    estimate_derivative_sup,
    smoothgrad_remainder_bound,
    smoothgrad_series,
    vargrad_remainder_bounds,
    vargrad_series,
)

__version__ = "0.1.0"

__all__ = [
    "AttributionVector",
    "Ball",
    "ConfigError",
    "DerivativeTable",
    "DimensionMismatchError",
    "EnumerationCapError",
    "GradSeriesError",
    "NoiseSpec",
    "NumericError",
    "ParseError",
    "ScoreFunction",
    "SeriesEvaluation",
    "UsageError",
    "VarGradRemainder",
    "check_cov_bound",
    "check_variance_bound",
    "degree",
    "derivative_table",
    "derive_seed",
    "estimate_derivative_sup",
    "evaluate",
    "exact_smoothgrad",
    "exact_vargrad",
    "fd_partial",
    "gaussian_noise",
    "mc_attributions",
    "paired_run",
    "parse",
    "saliency",
    "saliency_partial",
    "serialize",
    "smoothgrad_mc",
    "smoothgrad_remainder_bound",
    "smoothgrad_series",
    "split_affine",
    "vargrad_mc",
    "vargrad_remainder_bounds",
    "vargrad_series",
    "__version__",
]
