"""Steps shared by the sharp, fuzzy and kink estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from ..kernelfit.design import Design, DesignLayout, Sample, build_design, drop_collinear_covariates
from ..kernelfit.wls import weighted_ols
from ..lasso.selection import SelectionSources, selection_sources
from ..lasso.solver import fit_local_lasso
from ..lasso.tuning import tune_penalty
from ..localpoly.bandwidth import range_cap, rule_of_thumb_bandwidth
from ..localpoly.bias_variance import BiasVariance
from .inference import robust_ci
from .models import Method, RddEstimate, RddRequest


@dataclass(frozen=True, eq=False)
class PostFit:
    """Weighted OLS on the base block plus a set of covariates."""

    tau: float
    gamma: NDArray[np.float64]
    covariates: Tuple[int, ...]
    design: Design


@dataclass(frozen=True)
class SelectionOutcome:
    """Covariates chosen by the local Lasso together with its diagnostics."""

    selected: Tuple[int, ...]
    lambda_used: float
    converged: bool
    sources: SelectionSources


def pilot_bandwidth(request: RddRequest) -> float:
    """Rule-of-thumb bandwidth, capped at the shorter side's range."""
    sample = request.sample
    return min(
        rule_of_thumb_bandwidth(sample.x, request.settings.pilot_constant),
        range_cap(sample.centered),
    )


def fit_columns(
    sample: Sample,
    covariates: Sequence[int],
    h: float,
    request: RddRequest,
    *,
    outcome: Optional[ArrayLike] = None,
    layout: DesignLayout = DesignLayout.JUMP,
) -> PostFit:
    """Fit the design at ``h``; linearly dependent covariates are dropped first."""
    design = build_design(sample, h, request.kernel, tuple(covariates), outcome=outcome, layout=layout)
    if design.covariate_index:
        design, _ = drop_collinear_covariates(design)
    fit = weighted_ols(design)
    return PostFit(
        tau=float(fit.coef[1]),
        gamma=np.asarray(fit.coef[design.base_columns :]),
        covariates=tuple(design.covariate_index),
        design=design,
    )


def localized_design(
    request: RddRequest, h: float, *, layout: DesignLayout = DesignLayout.JUMP
) -> Design:
    """Design over all covariates at bandwidth ``h``."""
    sample = request.sample
    return build_design(sample, h, request.kernel, tuple(range(sample.p)), layout=layout)


def select_on_design(
    request: RddRequest, design: Design, *, level: Optional[float] = None
) -> SelectionOutcome:
    """Partially penalized local Lasso on a prepared design.

    ``level`` fixes the penalty level, as when a second response shares the first one's.
    """
    template = request.settings.penalty_template(
        request.lambda_rule,
        request.lambda_value if request.lambda_value is not None else 0.0,
        request.selection_rule,
    )
    tuned = tune_penalty(design, template, level=level)
    partial = fit_local_lasso(design, tuned)
    sources = selection_sources(design, tuned, request.sample.n, partial_fit=partial)
    selected = sources.pick(request.selection_source)
    logger.info(
        f"Local Lasso at h={design.bandwidth:.4f} selected {len(selected)} of "
        f"{request.sample.p} covariates",
        lam=tuned.lam,
        converged=partial.converged,
    )
    return SelectionOutcome(
        selected=selected,
        lambda_used=tuned.lam,
        converged=partial.converged,
        sources=sources,
    )


def select_covariates(
    request: RddRequest, h: float, *, layout: DesignLayout = DesignLayout.JUMP
) -> SelectionOutcome:
    """Partially penalized local Lasso over all covariates at bandwidth ``h``."""
    return select_on_design(request, localized_design(request, h, layout=layout))


def assemble_estimate(
    request: RddRequest,
    point: float,
    estimates: BiasVariance,
    covariates: Sequence[int],
    method_used: Method,
    *,
    scale: float = 1.0,
    selection: Optional[SelectionOutcome] = None,
) -> RddEstimate:
    """Robust interval and bookkeeping for a point estimate.

    ``scale`` divides the estimate, its bias and its standard errors; it is the
    known denominator of the kink estimator and 1 otherwise.
    """
    sample = request.sample
    interval = robust_ci(
        point / scale,
        estimates.bias_correction / scale,
        estimates.variance_robust / scale**2,
        estimates.normalizer,
        request.confidence_level,
    )
    n_minus, n_plus = sample.effective_counts(estimates.bandwidths.h)
    covariates = tuple(covariates)
    return RddEstimate(
        tau_hat=point / scale,
        tau_bc=interval.tau_bc,
        se_robust=interval.se,
        se_conventional=estimates.se_conventional / abs(scale),
        ci=interval.bounds,
        p_value=interval.p_value,
        bandwidths=estimates.bandwidths,
        n_minus=n_minus,
        n_plus=n_plus,
        selected=covariates,
        selected_labels=tuple(sample.covariate_names[j] for j in covariates),
        method_used=method_used,
        design_kind=request.design_kind,
        level=request.confidence_level,
        bias=estimates.bias / scale,
        variance=estimates.variance / scale**2,
        variance_robust=estimates.variance_robust / scale**2,
        lambda_used=None if selection is None else selection.lambda_used,
        lasso_converged=None if selection is None else selection.converged,
        selection_full=None if selection is None else selection.sources.full,
        selection_partial=None if selection is None else selection.sources.partial,
    )

