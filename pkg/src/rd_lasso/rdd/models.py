"""Requests and results of the RD estimators."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Any, Dict, Optional, Tuple

from ..config.settings import EstimationSettings
from ..errors import ConfigError
from ..kernelfit.design import Sample
from ..kernelfit.kernels import KernelFamily
from ..lasso.penalty import LambdaRule, SelectionSource, ThresholdRule
from ..localpoly.bias_variance import BandwidthPair, VarianceEstimator


class Method(str, Enum):
    """How covariates enter the estimator."""

    STANDARD = "standard"
    COVARIATE_ADJUSTED = "covariate_adjusted"
    COVARIATE_SELECTION = "covariate_selection"


class DesignKind(str, Enum):
    SHARP = "sharp"
    FUZZY = "fuzzy"
    KINK = "kink"


class BandwidthMode(str, Enum):
    """Which covariates the bandwidth selector sees.

    ``AUTO_WITHOUT_COVARIATES`` selects ``h`` ignoring covariates,
    ``AUTO_WITH_COVARIATES`` selects it with the covariates the method uses,
    ``ADAPTIVE`` selects covariates at the covariate-free bandwidth and then
    re-selects ``h`` with the chosen ones, ``FIXED`` takes user values.
    """

    AUTO_WITHOUT_COVARIATES = "auto_without_covariates"
    AUTO_WITH_COVARIATES = "auto_with_covariates"
    ADAPTIVE = "adaptive"
    FIXED = "fixed"


@dataclass(frozen=True, eq=False)
class RddRequest:
    """One estimation request."""

    sample: Sample
    method: Method = Method.COVARIATE_SELECTION
    design_kind: DesignKind = DesignKind.SHARP
    kink_denominator: Optional[float] = None
    kernel: KernelFamily = KernelFamily.TRIANGULAR
    bandwidth_mode: BandwidthMode = BandwidthMode.ADAPTIVE
    fixed_h: Optional[float] = None
    fixed_b: Optional[float] = None
    confidence_level: float = 0.95
    hb_restricted: bool = False
    lambda_rule: LambdaRule = LambdaRule.PLUGIN
    lambda_value: Optional[float] = None
    selection_rule: ThresholdRule = ThresholdRule.SUPPORT
    selection_source: SelectionSource = SelectionSource.PARTIAL
    variance_estimator: VarianceEstimator = VarianceEstimator.NN
    settings: EstimationSettings = field(default_factory=EstimationSettings)

    def __post_init__(self) -> None:
        """Coerce enum fields and validate the request."""
        for name, kind in (
            ("method", Method),
            ("design_kind", DesignKind),
            ("kernel", KernelFamily),
            ("bandwidth_mode", BandwidthMode),
            ("lambda_rule", LambdaRule),
            ("selection_rule", ThresholdRule),
            ("selection_source", SelectionSource),
            ("variance_estimator", VarianceEstimator),
        ):
            object.__setattr__(self, name, kind(getattr(self, name)))

        if not 0.0 < self.confidence_level < 1.0:
            raise ConfigError(f"Confidence level must lie in (0, 1), got {self.confidence_level}")

        if self.design_kind is DesignKind.FUZZY and self.sample.w is None:
            raise ConfigError("Fuzzy design requires a take-up column")
        if self.design_kind is DesignKind.KINK:
            den = self.kink_denominator
            if den is None or not math.isfinite(den) or den == 0.0:
                raise ConfigError("Kink design requires a finite nonzero kink denominator")

        if self.bandwidth_mode is BandwidthMode.FIXED:
            if self.fixed_h is None:
                raise ConfigError("Fixed bandwidth mode requires h")
            b = self.fixed_h if self.fixed_b is None else self.fixed_b
            if self.hb_restricted and b != self.fixed_h:
                raise ConfigError("h/b restriction conflicts with a fixed b different from h")
            object.__setattr__(self, "fixed_b", b)
            BandwidthPair(self.fixed_h, b, self.hb_restricted)

        if self.lambda_rule is LambdaRule.FIXED:
            if self.lambda_value is None or not self.lambda_value >= 0:
                raise ConfigError("A fixed penalty rule requires a nonnegative lambda value")

    @property
    def fixed_bandwidths(self) -> BandwidthPair:
        assert self.fixed_h is not None and self.fixed_b is not None
        return BandwidthPair(self.fixed_h, self.fixed_b, self.hb_restricted)


@dataclass(frozen=True, eq=False)
class RddEstimate:
    """Point estimate, bias-corrected estimate and robust interval.

    ``bias``, ``variance`` and ``variance_robust`` are the estimated leading
    bias constant and the conventional and robust variance constants; the
    standard errors divide the variances by ``n*h`` (``n*h^3`` for kinks) and,
    for ratio estimators, are already on the scale of ``tau_hat``.
    """

    tau_hat: float
    tau_bc: float
    se_robust: float
    se_conventional: float
    ci: Tuple[float, float]
    p_value: float
    bandwidths: BandwidthPair
    n_minus: int
    n_plus: int
    selected: Tuple[int, ...]
    selected_labels: Tuple[str, ...]
    method_used: Method
    design_kind: DesignKind
    level: float
    bias: float = 0.0
    variance: float = 0.0
    variance_robust: float = 0.0
    lambda_used: Optional[float] = None
    lasso_converged: Optional[bool] = None
    selection_full: Optional[Tuple[int, ...]] = None
    selection_partial: Optional[Tuple[int, ...]] = None

    @property
    def ci_length(self) -> float:
        return self.ci[1] - self.ci[0]

    def to_dict(self) -> Dict[str, Any]:
        """Plain-Python representation for JSON output."""
        return {
            "design": self.design_kind.value,
            "method": self.method_used.value,
            "tau_hat": self.tau_hat,
            "tau_bc": self.tau_bc,
            "se_robust": self.se_robust,
            "se_conventional": self.se_conventional,
            "ci_lower": self.ci[0],
            "ci_upper": self.ci[1],
            "level": self.level,
            "p_value": self.p_value,
            "h": self.bandwidths.h,
            "b": self.bandwidths.b,
            "hb_restricted": self.bandwidths.restricted,
            "n_minus": self.n_minus,
            "n_plus": self.n_plus,
            "selected": list(self.selected),
            "selected_labels": list(self.selected_labels),
            "bias": self.bias,
            "variance": self.variance,
            "variance_robust": self.variance_robust,
            "lambda": self.lambda_used,
            "lasso_converged": self.lasso_converged,
            "selection_full": None if self.selection_full is None else list(self.selection_full),
            "selection_partial": None if self.selection_partial is None else list(self.selection_partial),
        }
