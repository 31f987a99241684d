"""Local polynomial fits, variance estimation, bias/variance and bandwidth choice."""

from .bandwidth import (
    PILOT_CONSTANT,
    mse_objective,
    mse_optimal_bandwidth,
    mse_optimal_h,
    mse_optimal_kink_bandwidth,
    mse_optimal_kink_h,
    pilot_curvature_bandwidth,
    range_cap,
    rule_of_thumb_bandwidth,
    third_derivative_bandwidth,
)
from .bias_variance import (
    BandwidthPair,
    BiasVariance,
    VarianceEstimator,
    bias_variance_estimates,
    combined_response,
    deviations_for,
    kink_bias_variance,
    kink_slope_weights,
)
from .fits import Side, local_poly_fit, local_poly_operator, side_mask
from .variance import nn_deviations, nn_variance, plugin_deviations, project_psd, weighted_covariance

__all__ = [
    "PILOT_CONSTANT",
    "mse_objective",
    "mse_optimal_bandwidth",
    "mse_optimal_h",
    "mse_optimal_kink_bandwidth",
    "mse_optimal_kink_h",
    "pilot_curvature_bandwidth",
    "range_cap",
    "rule_of_thumb_bandwidth",
    "third_derivative_bandwidth",
    "BandwidthPair",
    "BiasVariance",
    "VarianceEstimator",
    "bias_variance_estimates",
    "combined_response",
    "deviations_for",
    "kink_bias_variance",
    "kink_slope_weights",
    "Side",
    "local_poly_fit",
    "local_poly_operator",
    "side_mask",
    "nn_deviations",
    "nn_variance",
    "plugin_deviations",
    "project_psd",
    "weighted_covariance",
]
