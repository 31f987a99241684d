"""Sharp, fuzzy and kink RD estimators with robust bias-corrected inference."""

from .api import estimate
from .compare import (
    ComparisonColumn,
    MethodComparison,
    MethodSpec,
    compare_methods,
    standard_method_grid,
)
from .fuzzy import estimate_fuzzy
from .inference import RobustInterval, critical_value, relative_efficiency, robust_ci
from .kink import estimate_kink
from .models import BandwidthMode, DesignKind, Method, RddEstimate, RddRequest
from .report import OutputFormat, render_comparison, render_estimate
from .sharp import estimate_sharp

__all__ = [
    "estimate",
    "ComparisonColumn",
    "MethodComparison",
    "MethodSpec",
    "compare_methods",
    "standard_method_grid",
    "estimate_fuzzy",
    "RobustInterval",
    "critical_value",
    "relative_efficiency",
    "robust_ci",
    "estimate_kink",
    "BandwidthMode",
    "DesignKind",
    "Method",
    "RddEstimate",
    "RddRequest",
    "OutputFormat",
    "render_comparison",
    "render_estimate",
    "estimate_sharp",
]
