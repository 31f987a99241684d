"""Penalty-level selection: iterated plug-in rule and cross-validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Optional

import numpy as np
from numpy.typing import NDArray
from loguru import logger
from scipy.stats import norm
from sklearn.model_selection import StratifiedKFold

from ..errors import ConfigError, DegenerateResidualsError, SingularDesignError
from ..kernelfit.design import Design
from ..kernelfit.wls import solve_weighted
from .penalty import LambdaRule, PenaltyConfig
from .solver import ProfiledProblem, fit_with_problem, resolve_loadings


@dataclass(frozen=True, eq=False)
class CrossValidationPath:
    """Out-of-fold kernel-weighted squared error along a descending lambda grid."""

    grid: NDArray[np.float64]
    errors: NDArray[np.float64]
    chosen_index: int
    n_splits: int

    @property
    def lam(self) -> float:
        return float(self.grid[self.chosen_index])


def plugin_lambda_core(n_loc: int, p: int, c: float = 1.1, alpha: float = 0.1) -> float:
    """2c * Phi^{-1}(1 - alpha/(2p)) / sqrt(n_loc), before loadings."""
    if p < 1:
        raise ConfigError("Plug-in penalty needs at least one penalized column")
    if n_loc < 1:
        raise ConfigError("Plug-in penalty needs at least one local observation")
    return float(2.0 * c * norm.ppf(1.0 - alpha / (2.0 * p)) / np.sqrt(n_loc))


def pilot_residuals(design: Design) -> NDArray[np.float64]:
    """Residuals of the covariate-free local fit on the base block.

    Raises:
        DegenerateResidualsError: If the residuals vanish (e.g. constant outcome).
    """
    base = design.g[:, : max(design.base_columns, 1)]
    resid = solve_weighted(base, design.weights, design.response, design.normalizer).residuals
    _require_dispersion(design, resid)
    return resid


def _require_dispersion(design: Design, resid: NDArray[np.float64]) -> None:
    w = design.weights / design.weights.sum()
    rms_resid = float(np.sqrt(w @ resid**2))
    rms_y = float(np.sqrt(w @ design.response**2))
    if rms_resid <= 1e-12 * (1.0 + rms_y):
        raise DegenerateResidualsError(
            "Pilot residuals have zero variance; the outcome is exactly explained by the base block"
        )


def plugin_loadings(
    design: Design,
    resid: NDArray[np.float64],
    columns: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    """psi_j = sqrt((1/(nh)) sum K G_j^2 e^2).

    Args:
        design: Localized design.
        resid: Current residuals.
        columns: Regressors to score, by default ``design.g``. The plug-in rule passes
            the penalized columns net of the unpenalized block.
    """
    g = design.g if columns is None else columns
    moment = (design.weights * resid**2) @ g**2 / design.normalizer
    return np.sqrt(moment)


def correlated_residuals(problem: ProfiledProblem, count: int) -> Optional[NDArray[np.float64]]:
    """Residuals after adding the ``count`` penalized columns most correlated with the outcome.

    Correlations are kernel-weighted and taken after the unpenalized block is
    projected out. Returns None when ``count`` is zero, the fit is singular or it
    leaves no residual spread.
    """
    design = problem.design
    if count <= 0 or not problem.penalized:
        return None
    a = problem.partialled_columns
    r = problem.partialled_response
    w = design.weights
    spread = np.sqrt((w @ a**2) * float(w @ r**2))
    corr = np.abs((w * r) @ a) / np.where(spread > 0, spread, np.inf)
    top = np.argsort(-corr, kind="stable")[: min(count, len(problem.penalized))]
    columns = sorted(set(problem.free) | {problem.penalized[int(j)] for j in top})
    try:
        resid = solve_weighted(design.g[:, columns], w, design.response, design.normalizer).residuals
        _require_dispersion(design, resid)
    except (SingularDesignError, DegenerateResidualsError):
        return None
    return resid


def _post_residuals(design: Design, support: List[int], fallback: NDArray[np.float64]) -> NDArray[np.float64]:
    columns = sorted(set(range(design.base_columns)) | set(support))
    try:
        return solve_weighted(
            design.g[:, columns], design.weights, design.response, design.normalizer
        ).residuals
    except SingularDesignError:
        return fallback


def _tune_plugin(
    design: Design, template: PenaltyConfig, level: Optional[float] = None
) -> PenaltyConfig:
    exempt: FrozenSet[int] = template.unpenalized_for(design.base_columns)
    n_penalized = design.n_columns - len(exempt)
    lam = (
        plugin_lambda_core(design.n_loc, n_penalized, template.plugin_c, template.plugin_alpha)
        if level is None
        else level
    )

    resid = pilot_residuals(design)
    problem = ProfiledProblem(design, exempt)
    scored = np.zeros_like(design.g)
    scored[:, problem.penalized] = problem.partialled_columns
    initial_resid = correlated_residuals(problem, template.plugin_initial_covariates)
    if initial_resid is not None:
        resid = initial_resid
    psi = plugin_loadings(design, resid, scored)

    initial: Optional[NDArray[np.float64]] = None
    for iteration in range(template.max_loading_iterations):
        fit = fit_with_problem(problem, template.with_lambda(lam), psi, initial)
        initial = fit.theta[problem.penalized]
        lasso_resid = design.response - design.g @ fit.theta
        resid = _post_residuals(design, list(fit.support), lasso_resid)

        new_psi = plugin_loadings(design, resid, scored)
        if not np.any(new_psi[problem.penalized] > 0):
            logger.debug("Post-Lasso residuals vanished; keeping previous loadings")
            break

        previous = psi[problem.penalized]
        changed = np.abs(new_psi[problem.penalized] - previous)
        relative = np.where(previous > 0, changed / np.where(previous > 0, previous, 1.0), np.inf)
        psi = new_psi
        if float(np.max(relative, initial=0.0)) < template.loading_tolerance:
            logger.debug(f"Plug-in loadings settled after {iteration + 1} refreshes")
            break

    logger.debug(f"Plug-in penalty: lambda={lam:.4g}, n_loc={design.n_loc}, p={n_penalized}")
    return template.with_lambda(lam, psi)


def cross_validation_path(design: Design, template: PenaltyConfig) -> CrossValidationPath:
    """K-fold CV over a log-spaced grid from lambda_max down to ratio * lambda_max.

    Folds are stratified by side of the cutoff. Each training fold's ``n*h`` is
    scaled by its share of rows. Ties within 1e-10 go to the larger lambda.
    """
    pilot_residuals(design)
    exempt = template.unpenalized_for(design.base_columns)
    loadings = resolve_loadings(design, template)
    full_problem = ProfiledProblem(design, exempt)
    pen_loadings = loadings[full_problem.penalized]
    if not full_problem.penalized:
        raise ConfigError("Cross-validation needs at least one penalized column")

    top = full_problem.lambda_max(pen_loadings)
    if top <= 0.0:
        grid = np.zeros(1)
        return CrossValidationPath(grid=grid, errors=np.zeros(1), chosen_index=0, n_splits=0)
    grid = np.geomspace(top, top * template.cv_grid_ratio, template.cv_grid_size)

    labels = np.asarray(design.side, dtype=int)
    largest_class = int(max(np.bincount(labels)))
    n_splits = max(2, min(template.cv_folds, largest_class, design.n_loc))
    folds = StratifiedKFold(n_splits=n_splits, shuffle=False)

    errors = np.zeros(grid.shape[0])
    for train, test in folds.split(np.zeros((design.n_loc, 1)), labels):
        problem = ProfiledProblem(design.subset_rows(train), exempt)
        initial: Optional[NDArray[np.float64]] = None
        for i, lam in enumerate(grid):
            theta_pen, _, _ = problem.solve(
                float(lam), pen_loadings, template.tolerance, template.max_sweeps, initial
            )
            initial = theta_pen
            theta = problem.assemble(theta_pen)
            resid = design.response[test] - design.g[test] @ theta
            errors[i] += float(design.weights[test] @ resid**2)

    best = float(errors.min())
    chosen = int(np.flatnonzero(errors <= best + 1e-10 * max(1.0, abs(best)))[0])
    logger.debug(
        f"Cross-validated lambda={grid[chosen]:.4g} (grid index {chosen} of {grid.shape[0]}, "
        f"{n_splits} folds)"
    )
    return CrossValidationPath(grid=grid, errors=errors, chosen_index=chosen, n_splits=n_splits)


def tune_penalty(
    design: Design, template: PenaltyConfig, *, level: Optional[float] = None
) -> PenaltyConfig:
    """Resolve the penalty level and loadings according to ``template.lambda_rule``.

    Args:
        design: Localized design.
        template: Penalty settings and rule.
        level: Penalty level shared with another response. The plug-in rule then
            only iterates its loadings; the other rules use it as given.

    Returns:
        A fixed-rule PenaltyConfig carrying the chosen level and full-length loadings.

    Raises:
        DegenerateResidualsError: If the pilot residual variance is zero.
    """
    if level is not None and not level >= 0:
        raise ConfigError(f"Shared penalty level must be nonnegative, got {level}")
    if template.lambda_rule is LambdaRule.PLUGIN:
        return _tune_plugin(design, template, level)
    if level is not None:
        pilot_residuals(design)
        return template.with_lambda(level, resolve_loadings(design, template))
    if template.lambda_rule is LambdaRule.CROSS_VALIDATION:
        path = cross_validation_path(design, template)
        return template.with_lambda(path.lam, resolve_loadings(design, template))
    return template.with_lambda(template.lam, resolve_loadings(design, template))


def select_lambda(design: Design, penalty_template: PenaltyConfig) -> float:
    """Penalty level chosen by the template's rule."""
    return tune_penalty(design, penalty_template).lam
