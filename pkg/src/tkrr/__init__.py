"""Truncated kernel ridge regression: spectral fitting, exact risk, experiments."""

__version__ = "0.1.0"

from .alignment import (
    AlignmentRegime,
    AlignmentSpectrum,
    SyntheticSpectra,
    alignment_scores,
    bandlimited_spectrum,
    classify_regime,
    multiband_spectrum,
    polynomial_spectra,
    synthesize_target,
)
from .estimator import (
    FittedModel,
    RepresenterWeights,
    TkrrConfig,
    TruncatedKernelRidge,
    empirical_mse,
    fit,
    fit_with_null_component,
    predict,
    predict_many,
)
from .experiments import (
    CurveTable,
    GapTable,
    RateStudyResult,
    SurfaceTable,
    lambda_curve,
    log_lambda_grid,
    log_mse_gap,
    r_curve,
    rate_study,
    surface,
)
from .kernels import (
    GaussianKernel,
    kernel_eval,
    kernel_from_name,
    kernel_matrix,
    sample_uniform_cube,
)
from .risk import (
    MseReport,
    RateParams,
    bayes_mse_bandlimited,
    exact_mse,
    exact_mse_from_squares,
    jstar,
    monte_carlo_mse,
    optimal_params,
    rate_exponent,
    surrogate_mse,
)
from .spectral import (
    EigenSystem,
    EigenvalueFlooringWarning,
    SpectralFilter,
    TruncationSplitWarning,
    eigendecompose,
    jacobi_eigh,
    min_norm_basis_eval,
    min_norm_basis_matrix,
    spectral_filter,
    truncated_kernel_eval,
    truncated_kernel_matrix,
)
from .validation import DegeneracyError, NumericalFailureError, SchemaError

__all__ = [
    "__version__",
    "AlignmentRegime",
    "AlignmentSpectrum",
    "SyntheticSpectra",
    "alignment_scores",
    "bandlimited_spectrum",
    "classify_regime",
    "multiband_spectrum",
    "polynomial_spectra",
    "synthesize_target",
    "FittedModel",
    "RepresenterWeights",
    "TkrrConfig",
    "TruncatedKernelRidge",
    "empirical_mse",
    "fit",
    "fit_with_null_component",
    "predict",
    "predict_many",
    "CurveTable",
    "GapTable",
    "RateStudyResult",
    "SurfaceTable",
    "lambda_curve",
    "log_lambda_grid",
    "log_mse_gap",
    "r_curve",
    "rate_study",
    "surface",
    "GaussianKernel",
    "kernel_eval",
    "kernel_from_name",
    "kernel_matrix",
    "sample_uniform_cube",
    "MseReport",
    "RateParams",
    "bayes_mse_bandlimited",
    "exact_mse",
    "exact_mse_from_squares",
    "jstar",
    "monte_carlo_mse",
    "optimal_params",
    "rate_exponent",
    "surrogate_mse",
    "EigenSystem",
    "EigenvalueFlooringWarning",
    "SpectralFilter",
    "TruncationSplitWarning",
    "eigendecompose",
    "jacobi_eigh",
    "min_norm_basis_eval",
    "min_norm_basis_matrix",
    "spectral_filter",
    "truncated_kernel_eval",
    "truncated_kernel_matrix",
    "DegeneracyError",
    "NumericalFailureError",
    "SchemaError",
]
