"""Side-by-side comparison of the standard, covariate-adjusted and selection estimators."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from loguru import logger

from ..errors import RdLassoError
from .api import estimate
from .inference import relative_efficiency
from .models import BandwidthMode, Method, RddEstimate, RddRequest


@dataclass(frozen=True)
class MethodSpec:
    """One estimator column: a method and the covariates its bandwidth sees."""

    label: str
    method: Method
    bandwidth_mode: BandwidthMode


def standard_method_grid() -> Tuple[MethodSpec, ...]:
    """The four reported columns: standard, adjusted without and with covariate
    bandwidths, and covariate selection with the adaptive bandwidth."""
    return (
        MethodSpec("Standard", Method.STANDARD, BandwidthMode.AUTO_WITHOUT_COVARIATES),
        MethodSpec("Adjusted (h w/o cov.)", Method.COVARIATE_ADJUSTED, BandwidthMode.AUTO_WITHOUT_COVARIATES),
        MethodSpec("Adjusted (h w/ cov.)", Method.COVARIATE_ADJUSTED, BandwidthMode.AUTO_WITH_COVARIATES),
        MethodSpec("Selection (adaptive)", Method.COVARIATE_SELECTION, BandwidthMode.ADAPTIVE),
    )


@dataclass(frozen=True)
class ComparisonColumn:
    """Result of one column under one h/b setting."""

    spec: MethodSpec
    restricted: bool
    estimate: Optional[RddEstimate]
    error: Optional[str] = None
    ci_length_change: Optional[float] = None
    relative_efficiency: Optional[float] = None


@dataclass(frozen=True)
class MethodComparison:
    """All columns for the unrestricted and the h/b = 1 settings."""

    columns: Tuple[ComparisonColumn, ...]

    def for_setting(self, restricted: bool) -> Tuple[ComparisonColumn, ...]:
        return tuple(c for c in self.columns if c.restricted == restricted)


def _run(template: RddRequest, spec: MethodSpec, restricted: bool) -> ComparisonColumn:
    mode = BandwidthMode.FIXED if template.bandwidth_mode is BandwidthMode.FIXED else spec.bandwidth_mode
    fixed_b = template.fixed_h if restricted else template.fixed_b
    try:
        request = replace(
            template,
            method=spec.method,
            bandwidth_mode=mode,
            hb_restricted=restricted,
            fixed_b=fixed_b,
        )
        return ComparisonColumn(spec=spec, restricted=restricted, estimate=estimate(request))
    except RdLassoError as e:
        logger.warning(f"{spec.label} failed: {e}")
        return ComparisonColumn(spec=spec, restricted=restricted, estimate=None, error=str(e))


def compare_methods(
    template: RddRequest,
    methods: Optional[Sequence[MethodSpec]] = None,
    settings: Sequence[bool] = (False, True),
) -> MethodComparison:
    """Run every column in ``methods`` under each h/b setting.

    The first column is the reference for the CI length change (in percent)
    and for the relative efficiency. Columns that fail carry the error message
    instead of an estimate.
    """
    grid = tuple(methods) if methods is not None else standard_method_grid()
    columns: List[ComparisonColumn] = []
    for restricted in settings:
        results = [_run(template, spec, restricted) for spec in grid]
        reference = results[0].estimate
        for column in results:
            if column.estimate is not None and reference is not None:
                change: Optional[float] = None
                if reference.ci_length > 0:
                    change = 100.0 * (column.estimate.ci_length / reference.ci_length - 1.0)
                column = replace(
                    column,
                    ci_length_change=change,
                    relative_efficiency=relative_efficiency(column.estimate, reference),
                )
            columns.append(column)
    return MethodComparison(columns=tuple(columns))
