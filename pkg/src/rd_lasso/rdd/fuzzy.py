"""Fuzzy RD: ratio of the outcome jump to the take-up jump.

Inference linearizes the ratio: with ``r = tau_Y / tau_W`` the estimation error
is, to first order, the jump estimator applied to ``(Y - r W) / tau_W`` with
covariate coefficients ``(gamma_Y - r gamma_W) / tau_W``, so the sharp bias and
variance machinery runs on that transformed outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from ..errors import ConfigError, DegenerateResidualsError, WeakDiscontinuityError
from ..kernelfit.design import Sample
from ..localpoly.bandwidth import mse_optimal_bandwidth
from ..localpoly.bias_variance import BandwidthPair, bias_variance_estimates
from .models import BandwidthMode, DesignKind, Method, RddEstimate, RddRequest
from .pipeline import (
    SelectionOutcome,
    assemble_estimate,
    fit_columns,
    localized_design,
    pilot_bandwidth,
    select_on_design,
)


@dataclass(frozen=True, eq=False)
class RatioFit:
    """Outcome and take-up fits at one bandwidth with their linearization."""

    ratio: float
    tau_w: float
    gamma: NDArray[np.float64]
    covariates: Tuple[int, ...]
    linearized: Sample


def _take_up(sample: Sample) -> NDArray[np.float64]:
    assert sample.w is not None
    return sample.w


def fit_ratio(request: RddRequest, covariates: Sequence[int], h: float) -> RatioFit:
    """Outcome and take-up jumps at ``h`` on a common set of covariates.

    Raises:
        WeakDiscontinuityError: The take-up jump is within the threshold of zero.
    """
    sample = request.sample
    w = _take_up(sample)
    outcome_fit = fit_columns(sample, covariates, h, request)
    # take-up is fitted on the covariates kept for the outcome
    take_up_fit = fit_columns(sample, outcome_fit.covariates, h, request, outcome=w)

    tau_w = take_up_fit.tau
    if abs(tau_w) <= request.settings.weak_denominator:
        raise WeakDiscontinuityError(
            f"Take-up jump {tau_w:.3g} at h={h:.4f} is too close to zero for a ratio estimate"
        )
    ratio = outcome_fit.tau / tau_w
    gamma = (outcome_fit.gamma - ratio * take_up_fit.gamma) / tau_w
    linearized = sample.with_outcome((sample.y - ratio * w) / tau_w)
    return RatioFit(
        ratio=ratio,
        tau_w=tau_w,
        gamma=gamma,
        covariates=outcome_fit.covariates,
        linearized=linearized,
    )


def _bandwidths_for(request: RddRequest, pilot: RatioFit) -> BandwidthPair:
    return mse_optimal_bandwidth(
        pilot.linearized,
        pilot.covariates,
        pilot.gamma,
        request.kernel,
        restricted=request.hb_restricted,
        pilot_constant=request.settings.pilot_constant,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
        regularization=request.settings.bandwidth_regularization,
    )


def _union_selection(request: RddRequest, h: float) -> Tuple[Tuple[int, ...], SelectionOutcome]:
    """Union of the covariates selected for the outcome and for take-up.

    Both Lassos share the window and the penalty level tuned on the outcome.
    """
    design = localized_design(request, h)
    outcome_selection = select_on_design(request, design)
    take_up_design = design.with_response(_take_up(request.sample)[np.asarray(design.rows)])
    try:
        take_up_selected = select_on_design(
            request, take_up_design, level=outcome_selection.lambda_used
        ).selected
    except DegenerateResidualsError:
        logger.info("Take-up is exactly explained by the base regressors; no take-up selection")
        take_up_selected = ()
    union = tuple(sorted(set(outcome_selection.selected) | set(take_up_selected)))
    return union, outcome_selection


def estimate_fuzzy(request: RddRequest) -> RddEstimate:
    """Fuzzy RD estimate ``tau_Y / tau_W`` with delta-method robust inference.

    Raises:
        ConfigError: The request is not for a fuzzy design.
        WeakDiscontinuityError: ``|tau_W| <= weak_denominator`` at the pilot or final bandwidth.
    """
    if request.design_kind is not DesignKind.FUZZY:
        raise ConfigError(f"estimate_fuzzy cannot run a {request.design_kind.value} design")

    sample = request.sample
    mode = request.bandwidth_mode
    pilot_h = pilot_bandwidth(request)

    if mode is BandwidthMode.FIXED:
        first_stage = request.fixed_bandwidths
    else:
        first_stage = _bandwidths_for(request, fit_ratio(request, (), pilot_h))

    method = request.method if sample.p > 0 else Method.STANDARD
    selection: Optional[SelectionOutcome] = None
    if method is Method.STANDARD:
        covariates: Tuple[int, ...] = ()
    elif method is Method.COVARIATE_ADJUSTED:
        covariates = tuple(range(sample.p))
    else:
        covariates, selection = _union_selection(request, first_stage.h)
        if not covariates:
            method = Method.STANDARD

    if covariates and mode in (BandwidthMode.AUTO_WITH_COVARIATES, BandwidthMode.ADAPTIVE):
        bandwidths = _bandwidths_for(request, fit_ratio(request, covariates, pilot_h))
    else:
        bandwidths = first_stage

    final = fit_ratio(request, covariates, bandwidths.h)
    estimates = bias_variance_estimates(
        final.linearized,
        final.covariates,
        final.gamma,
        bandwidths,
        request.kernel,
        j_neighbors=request.settings.nn_neighbors,
        variance_estimator=request.variance_estimator,
    )
    logger.info(f"Fuzzy estimate {final.ratio:.4f} (take-up jump {final.tau_w:.4f})")
    return assemble_estimate(
        request, final.ratio, estimates, final.covariates, method, selection=selection
    )
