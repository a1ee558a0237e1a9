"""specshift: spectral kernel regression and adaptive transfer under concept shift.

A small numerical library plus a deterministic experiment harness:

- stationary kernels (Gaussian, Matern) with a self-contained Bessel-K core
  (compiled extension with a pure NumPy fallback);
- spectral-filter regression (KRR, gradient flow, spectral cut-off) realized
  on the eigendecomposition of the scaled Gram matrix;
- a training/validation adaptive estimator over a smoothness candidate grid;
- two-phase hypothesis transfer (pre-train on source, fit the shift on
  transformed target labels, compose);
- Gaussian-process truth simulation and the convergence-rate / transfer /
  plateau studies, reproducible byte-for-byte under a fixed seed.
"""

from ._backend import backend_name
from .adaptive import AdaptiveConfig, AdaptiveFit, adaptive_fit, candidate_grid
from .data import Dataset, dataset_from_text, dataset_to_text
from .errors import ConfigError, InputError, NumericalError
from .kernels import (GramMatrix, KernelSpec, bessel_k, gaussian_eval, gram,
                      matern_eval, pairwise)
from .simulate import (ShiftScenario, TruthFunction, gp_sample_path,
                       make_regression_data, make_shift_scenario,
                       make_transfer_datasets, truth_from_text, truth_to_text)
from .spectral import (FilterSpec, FittedModel, filter_apply, krr_direct_solve,
                       lambda_schedule, predict, spectral_fit)
from .transfer import (HtlResult, TransformPair, htl_predict, rahtl_fit,
                       transform_G, transform_g)
from .quadrature import simpson_integral
from .evaluate import (CSV_COLUMNS, PhaseStudyConfig, RateFit,
                       RateStudyConfig, RiskEstimate, StudyResult,
                       TransferStudyConfig, excess_risk, fit_rate, mean_risk,
                       run_phase_study, run_rate_study, run_transfer_study,
                       theoretical_rate, xi_star)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig", "AdaptiveFit", "CSV_COLUMNS", "ConfigError", "Dataset",
    "FilterSpec", "FittedModel", "GramMatrix", "HtlResult", "InputError",
    "KernelSpec", "NumericalError", "PhaseStudyConfig", "RateFit",
    "RateStudyConfig", "RiskEstimate", "ShiftScenario", "StudyResult",
    "TransferStudyConfig", "TransformPair", "TruthFunction", "adaptive_fit",
    "backend_name",
    "bessel_k", "candidate_grid", "dataset_from_text", "dataset_to_text",
    "excess_risk", "filter_apply", "fit_rate", "gaussian_eval",
    "gp_sample_path", "gram", "htl_predict", "krr_direct_solve",
    "lambda_schedule", "make_regression_data", "make_shift_scenario",
    "make_transfer_datasets", "matern_eval", "mean_risk", "pairwise",
    "predict", "rahtl_fit", "run_phase_study", "run_rate_study",
    "run_transfer_study", "simpson_integral", "spectral_fit",
    "theoretical_rate", "transform_G", "transform_g", "truth_from_text",
    "truth_to_text", "xi_star", "__version__",
]
