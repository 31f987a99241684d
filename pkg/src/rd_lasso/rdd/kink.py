"""Regression kink design: change in slope divided by the known policy kink."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

from loguru import logger

from ..errors import ConfigError
from ..kernelfit.design import DesignLayout
from ..localpoly.bandwidth import mse_optimal_kink_bandwidth
from ..localpoly.bias_variance import BandwidthPair, kink_bias_variance
from .models import BandwidthMode, DesignKind, Method, RddEstimate, RddRequest
from .pipeline import (
    SelectionOutcome,
    assemble_estimate,
    fit_columns,
    pilot_bandwidth,
    select_covariates,
)


def kink_bandwidths(request: RddRequest, covariates: Sequence[int] = ()) -> BandwidthPair:
    """MSE-optimal pair for the slope-change estimator with ``covariates``."""
    gamma: Sequence[float] = ()
    kept: Tuple[int, ...] = ()
    if covariates:
        pilot = fit_columns(
            request.sample, covariates, pilot_bandwidth(request), request, layout=DesignLayout.KINK
        )
        gamma, kept = tuple(pilot.gamma), pilot.covariates
    return mse_optimal_kink_bandwidth(
        request.sample,
        kept,
        gamma,
        request.kernel,
        restricted=request.hb_restricted,
        pilot_constant=request.settings.pilot_constant,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
    )


def estimate_kink(request: RddRequest) -> RddEstimate:
    """Slope change at the cutoff from the kink regression (1, T*X, X, T*X^2, X^2, Z).

    The reported effect is the slope change divided by ``kink_denominator``;
    bias correction uses third derivatives from one-sided local cubic fits.

    Raises:
        ConfigError: The request is not for a kink design.
    """
    if request.design_kind is not DesignKind.KINK:
        raise ConfigError(f"estimate_kink cannot run a {request.design_kind.value} design")
    assert request.kink_denominator is not None

    sample = request.sample
    mode = request.bandwidth_mode
    first_stage = (
        request.fixed_bandwidths if mode is BandwidthMode.FIXED else kink_bandwidths(request)
    )

    method = request.method if sample.p > 0 else Method.STANDARD
    selection: Optional[SelectionOutcome] = None
    if method is Method.STANDARD:
        covariates: Tuple[int, ...] = ()
    elif method is Method.COVARIATE_ADJUSTED:
        covariates = tuple(range(sample.p))
    else:
        selection = select_covariates(request, first_stage.h, layout=DesignLayout.KINK)
        covariates = selection.selected
        if not covariates:
            method = Method.STANDARD

    if covariates and mode in (BandwidthMode.AUTO_WITH_COVARIATES, BandwidthMode.ADAPTIVE):
        bandwidths = kink_bandwidths(request, covariates)
    else:
        bandwidths = first_stage

    fit = fit_columns(sample, covariates, bandwidths.h, request, layout=DesignLayout.KINK)
    estimates = kink_bias_variance(
        sample,
        fit.covariates,
        fit.gamma,
        bandwidths,
        request.kernel,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
    )
    logger.info(f"Slope change {fit.tau:.4f} at h={bandwidths.h:.4f}")
    return assemble_estimate(
        request,
        fit.tau,
        estimates,
        fit.covariates,
        method,
        scale=request.kink_denominator,
        selection=selection,
    )
