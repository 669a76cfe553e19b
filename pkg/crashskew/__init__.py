"""crashskew: conditional skewness (GARCH-S) and pandemic crash-risk analysis."""

__all__ = [
    "ConvergenceError",
    "DataValidationError",
    "GarchSParams",
    "GarchSFit",
    "ShockForm",
    "fit_garchs",
    "filter_paths",
    "simulate_garchs",
    "ModelSpec",
    "Term",
    "ols_fit",
    "run_model",
    "study_models",
    "granger_both",
    "granger_f",
    "select_lag_bic",
    "RunConfig",
]

try:
    # Prefer absolute imports when the package is installed or run as a module
    from crashskew.errors import ConvergenceError, DataValidationError
    from crashskew.garchs import GarchSFit, GarchSParams, ShockForm, filter_paths, fit_garchs, simulate_garchs
    from crashskew.regress import ModelSpec, Term, ols_fit, study_models, run_model
    from crashskew.granger import granger_both, granger_f, select_lag_bic
    from crashskew.config import RunConfig
except ImportError:
    # Fallback to relative imports (useful when running files directly)
    from .errors import ConvergenceError, DataValidationError
    from .garchs import GarchSFit, GarchSParams, ShockForm, filter_paths, fit_garchs, simulate_garchs
    from .regress import ModelSpec, Term, ols_fit, study_models, run_model
    from .granger import granger_both, granger_f, select_lag_bic
    from .config import RunConfig

__version__ = "0.1.0"
