"""Sharp RD estimators: standard, covariate-adjusted and covariate-selection."""

from __future__ import annotations

from typing import Optional, Sequence

from loguru import logger

from ..errors import ConfigError
from ..localpoly.bandwidth import mse_optimal_bandwidth
from ..localpoly.bias_variance import BandwidthPair, bias_variance_estimates
from .models import BandwidthMode, DesignKind, Method, RddEstimate, RddRequest
from .pipeline import (
    SelectionOutcome,
    assemble_estimate,
    fit_columns,
    pilot_bandwidth,
    select_covariates,
)


def covariate_free_bandwidths(request: RddRequest) -> BandwidthPair:
    """MSE-optimal pair ignoring covariates, or the fixed pair."""
    if request.bandwidth_mode is BandwidthMode.FIXED:
        return request.fixed_bandwidths
    return mse_optimal_bandwidth(
        request.sample,
        (),
        (),
        request.kernel,
        restricted=request.hb_restricted,
        pilot_constant=request.settings.pilot_constant,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
        regularization=request.settings.bandwidth_regularization,
    )


def covariate_bandwidths(request: RddRequest, covariates: Sequence[int]) -> BandwidthPair:
    """MSE-optimal pair for the estimator using ``covariates``.

    The covariate coefficients entering the bias and variance come from a
    weighted OLS fit at the pilot bandwidth.
    """
    pilot = fit_columns(request.sample, covariates, pilot_bandwidth(request), request)
    return mse_optimal_bandwidth(
        request.sample,
        pilot.covariates,
        pilot.gamma,
        request.kernel,
        restricted=request.hb_restricted,
        pilot_constant=request.settings.pilot_constant,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
        regularization=request.settings.bandwidth_regularization,
    )


def _finalize(
    request: RddRequest,
    covariates: Sequence[int],
    bandwidths: BandwidthPair,
    method_used: Method,
    selection: Optional[SelectionOutcome] = None,
) -> RddEstimate:
    fit = fit_columns(request.sample, covariates, bandwidths.h, request)
    estimates = bias_variance_estimates(
        request.sample,
        fit.covariates,
        fit.gamma,
        bandwidths,
        request.kernel,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
    )
    return assemble_estimate(
        request, fit.tau, estimates, fit.covariates, method_used, selection=selection
    )


def estimate_sharp(request: RddRequest) -> RddEstimate:
    """Run the requested sharp RD estimator.

    The covariate-selection method selects covariates by a partially penalized
    local Lasso at the covariate-free bandwidth, then refits by weighted OLS with
    the selected covariates at a bandwidth chosen for them. An empty selection
    returns the standard estimator.

    Raises:
        ConfigError: The request is not for a sharp design.
        EmptySideError: No observations on one side within a bandwidth.
        SingularDesignError: The final weighted least squares problem is singular.
    """
    if request.design_kind is not DesignKind.SHARP:
        raise ConfigError(f"estimate_sharp cannot run a {request.design_kind.value} design")

    sample = request.sample
    mode = request.bandwidth_mode
    if request.method is Method.STANDARD or sample.p == 0:
        return _finalize(request, (), covariate_free_bandwidths(request), Method.STANDARD)

    all_covariates = tuple(range(sample.p))
    if request.method is Method.COVARIATE_ADJUSTED:
        if mode in (BandwidthMode.AUTO_WITHOUT_COVARIATES, BandwidthMode.FIXED):
            bandwidths = covariate_free_bandwidths(request)
        else:
            bandwidths = covariate_bandwidths(request, all_covariates)
        return _finalize(request, all_covariates, bandwidths, Method.COVARIATE_ADJUSTED)

    first_stage = covariate_free_bandwidths(request)
    logger.info(f"Covariate-free bandwidth h={first_stage.h:.4f} b={first_stage.b:.4f}")
    selection = select_covariates(request, first_stage.h)
    if not selection.selected:
        logger.info("No covariates selected; returning the standard estimator")
        return _finalize(request, (), first_stage, Method.STANDARD, selection)

    if mode in (BandwidthMode.AUTO_WITHOUT_COVARIATES, BandwidthMode.FIXED):
        bandwidths = first_stage
    else:
        bandwidths = covariate_bandwidths(request, selection.selected)
        logger.info(f"Bandwidth with selected covariates h={bandwidths.h:.4f} b={bandwidths.b:.4f}")
    return _finalize(
        request, selection.selected, bandwidths, Method.COVARIATE_SELECTION, selection
    )
