"""Local Lasso: solver, penalty selection, post-Lasso and selection rules."""

from .penalty import LambdaRule, PenaltyConfig, SelectionSource, ThresholdRule
from .selection import (
    LassoDiagnostics,
    SelectionSources,
    lasso_diagnostics,
    post_lasso,
    post_lasso_deviation_bound,
    rho_n,
    selection_set,
    selection_sources,
)
from .solver import (
    LassoFit,
    check_kkt,
    fit_local_lasso,
    lambda_max,
    lasso_objective,
    resolve_loadings,
)
from .tuning import (
    CrossValidationPath,
    cross_validation_path,
    correlated_residuals,
    pilot_residuals,
    plugin_lambda_core,
    plugin_loadings,
    select_lambda,
    tune_penalty,
)

__all__ = [
    "LambdaRule",
    "PenaltyConfig",
    "SelectionSource",
    "ThresholdRule",
    "LassoDiagnostics",
    "SelectionSources",
    "lasso_diagnostics",
    "post_lasso",
    "post_lasso_deviation_bound",
    "rho_n",
    "selection_set",
    "selection_sources",
    "LassoFit",
    "check_kkt",
    "fit_local_lasso",
    "lambda_max",
    "lasso_objective",
    "resolve_loadings",
    "CrossValidationPath",
    "cross_validation_path",
    "correlated_residuals",
    "pilot_residuals",
    "plugin_lambda_core",
    "plugin_loadings",
    "select_lambda",
    "tune_penalty",
]
