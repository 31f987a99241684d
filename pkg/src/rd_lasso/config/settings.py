"""Estimator tunables shared by the library, the CLI and the simulations."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from ..lasso.penalty import LambdaRule, PenaltyConfig, ThresholdRule
from ..localpoly.bandwidth import PILOT_CONSTANT


@dataclass(frozen=True)
class EstimationSettings:
    """Numerical settings for penalty choice, the solver and bandwidth pilots."""

    # Plug-in penalty
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
    solver_tolerance: float = 1e-8
    max_sweeps: int = 100_000

    # Variance and bandwidth pilots
    nn_neighbors: int = 3
    pilot_constant: float = PILOT_CONSTANT
    bandwidth_regularization: float = 1.0

    # Fuzzy designs
    weak_denominator: float = 1e-6

    def __post_init__(self) -> None:
        """Validate settings."""
        if self.nn_neighbors < 1:
            raise ConfigError("Nearest-neighbor count must be at least 1")
        if not self.pilot_constant > 0:
            raise ConfigError("Pilot bandwidth constant must be positive")
        if not self.bandwidth_regularization >= 0:
            raise ConfigError("Bandwidth regularization must be nonnegative")
        if not self.weak_denominator > 0:
            raise ConfigError("Weak-denominator threshold must be positive")
        # Remaining fields are validated by the PenaltyConfig they feed.
        self.penalty_template()

    def penalty_template(
        self,
        rule: LambdaRule = LambdaRule.PLUGIN,
        lam: float = 0.0,
        threshold_rule: ThresholdRule = ThresholdRule.SUPPORT,
    ) -> PenaltyConfig:
        """Partially penalized template whose level is resolved by ``rule``."""
        return PenaltyConfig(
            lam=lam,
            lambda_rule=rule,
            threshold_rule=threshold_rule,
            plugin_c=self.plugin_c,
            plugin_alpha=self.plugin_alpha,
            plugin_initial_covariates=self.plugin_initial_covariates,
            max_loading_iterations=self.max_loading_iterations,
            loading_tolerance=self.loading_tolerance,
            cv_folds=self.cv_folds,
            cv_grid_size=self.cv_grid_size,
            cv_grid_ratio=self.cv_grid_ratio,
            tolerance=self.solver_tolerance,
            max_sweeps=self.max_sweeps,
        )
