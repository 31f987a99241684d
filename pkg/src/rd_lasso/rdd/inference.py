"""Robust bias-corrected intervals and the relative-efficiency diagnostic."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Tuple

from scipy.stats import norm

from ..errors import ConfigError
from .models import RddEstimate


@dataclass(frozen=True)
class RobustInterval:
    """Bias-corrected estimate, its standard error and the normal interval."""

    lower: float
    upper: float
    p_value: float
    t_stat: float
    tau_bc: float
    se: float

    @property
    def bounds(self) -> Tuple[float, float]:
        return (self.lower, self.upper)


def critical_value(level: float) -> float:
    """Two-sided standard normal quantile z_{1-(1-level)/2}."""
    if not 0.0 < level < 1.0:
        raise ConfigError(f"Confidence level must lie in (0, 1), got {level}")
    return float(norm.ppf(1.0 - (1.0 - level) / 2.0))


def robust_ci(point: float, bias: float, variance: float, n_loc_scale: float, level: float) -> RobustInterval:
    """Interval ``(point - bias) +/- z * sqrt(variance / n_loc_scale)``.

    Args:
        point: Uncorrected estimate.
        bias: Full bias correction, ``h^2`` times the bias constant.
        variance: Robust variance constant.
        n_loc_scale: ``n*h`` for jumps, ``n*h^3`` for kinks.
        level: Confidence level.

    Returns:
        The interval with a two-sided normal p-value for a zero effect. A zero
        variance yields a degenerate interval and p-value 0 or 1.
    """
    if variance < 0 or not n_loc_scale > 0:
        raise ConfigError("Variance must be nonnegative and the scale positive")
    z = critical_value(level)
    tau_bc = point - bias
    se = math.sqrt(variance / n_loc_scale)
    if se == 0.0:
        p_value = 1.0 if tau_bc == 0.0 else 0.0
        t_stat = 0.0 if tau_bc == 0.0 else math.copysign(math.inf, tau_bc)
        return RobustInterval(tau_bc, tau_bc, p_value, t_stat, tau_bc, 0.0)

    t_stat = tau_bc / se
    return RobustInterval(
        lower=tau_bc - z * se,
        upper=tau_bc + z * se,
        p_value=float(2.0 * norm.sf(abs(t_stat))),
        t_stat=t_stat,
        tau_bc=tau_bc,
        se=se,
    )


def relative_efficiency(adjusted: RddEstimate, unadjusted: RddEstimate) -> float:
    """Conventional variance constant of ``adjusted`` over that of ``unadjusted``."""
    if unadjusted.variance == 0.0:
        return 1.0 if adjusted.variance == 0.0 else math.inf
    return adjusted.variance / unadjusted.variance
