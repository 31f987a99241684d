"""Penalty configuration for the local Lasso."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
import math
from typing import FrozenSet, Optional, Sequence, Tuple

from ..errors import ConfigError


class LambdaRule(str, Enum):
    """How the penalty level is chosen."""

    FIXED = "fixed"
    PLUGIN = "plugin"
    CROSS_VALIDATION = "cross_validation"


class ThresholdRule(str, Enum):
    """How covariates are read off a Lasso fit."""

    SUPPORT = "support"
    SCALED_THRESHOLD = "scaled_threshold"


class SelectionSource(str, Enum):
    """Which Lasso feeds covariate selection: base block unpenalized or everything penalized."""

    PARTIAL = "partial"
    FULL = "full"


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty level, exemptions and loadings for one local Lasso problem.

    ``unpenalized=None`` exempts the design's base block; an empty set penalizes
    every column. ``loadings=None`` uses the kernel-weighted standard deviation of
    each column, which is equivalent to penalizing standardized covariates.
    """

    lam: float = 0.0
    unpenalized: Optional[FrozenSet[int]] = None
    loadings: Optional[Tuple[float, ...]] = None
    lambda_rule: LambdaRule = LambdaRule.FIXED
    threshold_rule: ThresholdRule = ThresholdRule.SUPPORT

    # Plug-in rule
    plugin_c: float = 1.1
    plugin_alpha: float = 0.1
    plugin_initial_covariates: int = 3
    max_loading_iterations: int = 15
    loading_tolerance: float = 0.01

    # Cross-validation
    cv_folds: int = 10
    cv_grid_size: int = 50
    cv_grid_ratio: float = 1e-4

    # Coordinate descent
    tolerance: float = 1e-8
    max_sweeps: int = 100_000

    def __post_init__(self) -> None:
        """Validate penalty configuration."""
        object.__setattr__(self, "lambda_rule", LambdaRule(self.lambda_rule))
        object.__setattr__(self, "threshold_rule", ThresholdRule(self.threshold_rule))
        if self.unpenalized is not None:
            object.__setattr__(self, "unpenalized", frozenset(int(j) for j in self.unpenalized))
        if self.loadings is not None:
            object.__setattr__(self, "loadings", tuple(float(v) for v in self.loadings))

        if not math.isfinite(self.lam) or self.lam < 0:
            raise ConfigError(f"Penalty level must be finite and nonnegative, got {self.lam}")
        if self.loadings is not None and any(not v >= 0 for v in self.loadings):
            raise ConfigError("Penalty loadings must be nonnegative")
        if not self.plugin_c > 0:
            raise ConfigError("Plug-in constant c must be positive")
        if not 0 < self.plugin_alpha < 1:
            raise ConfigError("Plug-in alpha must lie in (0, 1)")
        if self.plugin_initial_covariates < 0:
            raise ConfigError("Initial plug-in covariate count cannot be negative")
        if self.max_loading_iterations < 0:
            raise ConfigError("Loading iterations cannot be negative")
        if self.cv_folds < 2:
            raise ConfigError("Cross-validation needs at least 2 folds")
        if self.cv_grid_size < 2:
            raise ConfigError("Cross-validation grid needs at least 2 points")
        if not 0 < self.cv_grid_ratio < 1:
            raise ConfigError("Cross-validation grid ratio must lie in (0, 1)")
        if not self.tolerance > 0 or self.max_sweeps < 1:
            raise ConfigError("Solver tolerance and sweep budget must be positive")

    def unpenalized_for(self, base_columns: int) -> FrozenSet[int]:
        """Resolve the exempt columns against a design's base block size."""
        if self.unpenalized is None:
            return frozenset(range(base_columns))
        return self.unpenalized

    def with_lambda(self, lam: float, loadings: Optional[Sequence[float]] = None) -> PenaltyConfig:
        """Copy with a resolved level (and loadings, when given) under the fixed rule."""
        return replace(
            self,
            lam=float(lam),
            loadings=self.loadings if loadings is None else tuple(float(v) for v in loadings),
            lambda_rule=LambdaRule.FIXED,
        )

    def fully_penalized(self) -> PenaltyConfig:
        """Copy penalizing every column, base block included."""
        return replace(self, unpenalized=frozenset())
