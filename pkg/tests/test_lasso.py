"""Tests for the local Lasso solver, penalty tuning and selection rules."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import optimize
from scipy.stats import norm

from rd_lasso.errors import ConfigError, DegenerateResidualsError, NotConvergedError
from rd_lasso.kernelfit import Design, Sample, build_design, weighted_ols
from rd_lasso.lasso import (
    LambdaRule,
    PenaltyConfig,
    SelectionSource,
    ThresholdRule,
    check_kkt,
    cross_validation_path,
    fit_local_lasso,
    lambda_max,
    lasso_diagnostics,
    correlated_residuals,
    lasso_objective,
    pilot_residuals,
    plugin_lambda_core,
    plugin_loadings,
    post_lasso,
    rho_n,
    selection_set,
    selection_sources,
    select_lambda,
    tune_penalty,
)
from rd_lasso.lasso.solver import LassoFit, ProfiledProblem
from tests.conftest import make_sharp_sample


def _design(n: int = 800, p: int = 5, seed: int = 11, h: float = 0.8) -> Design:
    sample = make_sharp_sample(n=n, p=p, seed=seed)
    return build_design(sample, h, covariate_subset=range(p))


def test_penalty_config_validation() -> None:
    with pytest.raises(ConfigError):
        PenaltyConfig(lam=-1.0)
    with pytest.raises(ConfigError):
        PenaltyConfig(lam=math.inf)
    with pytest.raises(ConfigError):
        PenaltyConfig(plugin_alpha=1.5)
    with pytest.raises(ConfigError):
        PenaltyConfig(cv_folds=1)

    penalty = PenaltyConfig(lambda_rule="plugin").with_lambda(0.3, [0.0, 1.0])
    assert penalty.lambda_rule is LambdaRule.FIXED
    assert penalty.lam == 0.3
    assert penalty.loadings == (0.0, 1.0)
    assert penalty.unpenalized_for(4) == frozenset({0, 1, 2, 3})
    assert penalty.fully_penalized().unpenalized_for(4) == frozenset()


def test_zero_penalty_matches_weighted_ols() -> None:
    """Test that lambda = 0 reproduces the unpenalized fit."""
    design = _design(p=3)
    fit = fit_local_lasso(design, PenaltyConfig(lam=0.0))
    assert fit.converged
    assert fit.theta == pytest.approx(weighted_ols(design).coef, abs=1e-6)


def test_lambda_max_zeroes_every_covariate() -> None:
    design = _design()
    top = lambda_max(design, PenaltyConfig())
    assert top > 0

    above = fit_local_lasso(design, PenaltyConfig(lam=top * 1.001))
    assert above.selected_covariates == ()
    assert len(above.support) >= 1

    below = fit_local_lasso(design, PenaltyConfig(lam=top * 0.1))
    assert 0 in below.selected_covariates


def test_solution_satisfies_kkt() -> None:
    design = _design()
    penalty = PenaltyConfig(lam=0.2 * lambda_max(design, PenaltyConfig()))
    fit = fit_local_lasso(design, penalty)
    assert fit.converged
    assert check_kkt(design, fit) < 1e-6
    assert fit.objective == pytest.approx(lasso_objective(design, fit.theta, fit.lambda_used, fit.loadings))


def test_objective_not_beaten_by_generic_minimizer() -> None:
    """Test the coordinate-descent optimum against a derivative-free search."""
    rng = np.random.default_rng(4)
    n = 40
    x = np.concatenate([rng.uniform(-1, -0.05, n // 2), rng.uniform(0.05, 1, n // 2)])
    z = rng.standard_normal((n, 2))
    y = 1.0 + 0.4 * (x >= 0) + 0.6 * z[:, 0] + 0.1 * rng.standard_normal(n)
    design = build_design(Sample(x=x, y=y, z=z), 1.5, covariate_subset=(0, 1))

    penalty = PenaltyConfig(lam=0.05)
    fit = fit_local_lasso(design, penalty)

    def objective(theta: np.ndarray) -> float:
        return lasso_objective(design, theta, penalty.lam, fit.loadings)

    search = optimize.minimize(
        objective, np.zeros(design.n_columns), method="Powell", options={"xtol": 1e-10, "ftol": 1e-12}
    )
    assert fit.objective <= search.fun + 1e-6


def test_fully_penalized_fit_shrinks_base_block() -> None:
    design = _design(p=2)
    penalty = PenaltyConfig(lam=1e6).fully_penalized()
    fit = fit_local_lasso(design, penalty)
    assert fit.unpenalized == ()
    assert np.all(fit.theta == 0.0)


def test_not_converged_raises() -> None:
    """Test the sweep budget with strongly correlated covariates."""
    rng = np.random.default_rng(8)
    n = 500
    x = rng.uniform(-1, 1, n)
    z0 = rng.standard_normal(n)
    z = np.column_stack([z0, z0 + 0.01 * rng.standard_normal(n)])
    y = 1.0 + z0 + 0.1 * rng.standard_normal(n)
    design = build_design(Sample(x=x, y=y, z=z), 1.0, covariate_subset=(0, 1))

    penalty = PenaltyConfig(lam=1e-4, max_sweeps=1)
    with pytest.raises(NotConvergedError) as excinfo:
        fit_local_lasso(design, penalty, raise_on_failure=True)
    assert excinfo.value.fit is not None
    assert not excinfo.value.fit.converged

    unchecked = fit_local_lasso(design, penalty)
    assert not unchecked.converged


def test_plugin_lambda_core() -> None:
    expected = 2 * 1.1 * norm.ppf(1 - 0.1 / 20) / math.sqrt(100)
    assert plugin_lambda_core(100, 10) == pytest.approx(expected)
    with pytest.raises(ConfigError):
        plugin_lambda_core(100, 0)


def test_tune_penalty_plugin() -> None:
    """Test that the plug-in rule returns a fixed level with exempt loadings at zero."""
    design = _design()
    tuned = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))
    assert tuned.lambda_rule is LambdaRule.FIXED
    assert tuned.lam == pytest.approx(plugin_lambda_core(design.n_loc, design.n_columns - 4))
    assert tuned.loadings is not None
    assert len(tuned.loadings) == design.n_columns
    assert tuned.loadings[:4] == (0.0, 0.0, 0.0, 0.0)
    assert all(v > 0 for v in tuned.loadings[4:])

    shared = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN), level=0.05)
    assert shared.lam == 0.05
    with pytest.raises(ConfigError):
        tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN), level=-1.0)


def test_pilot_residuals_degenerate() -> None:
    x = np.linspace(-1, 1, 101)
    y = 1.0 + 2.0 * (x >= 0)
    z = np.random.default_rng(0).standard_normal((101, 2))
    design = build_design(Sample(x=x, y=y, z=z), 0.9, covariate_subset=(0, 1))
    with pytest.raises(DegenerateResidualsError):
        pilot_residuals(design)
    with pytest.raises(DegenerateResidualsError):
        tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))


def test_cross_validation_path() -> None:
    design = _design(n=600)
    template = PenaltyConfig(lambda_rule=LambdaRule.CROSS_VALIDATION, cv_grid_size=20)
    path = cross_validation_path(design, template)

    assert path.grid.shape == (20,)
    assert path.grid[0] == pytest.approx(lambda_max(design, template))
    assert path.grid[-1] == pytest.approx(path.grid[0] * template.cv_grid_ratio)
    assert np.all(np.diff(path.grid) < 0)
    assert 0 <= path.chosen_index < 20
    assert 2 <= path.n_splits <= 10
    assert path.errors[path.chosen_index] == pytest.approx(path.errors.min())

    tuned = tune_penalty(design, template)
    assert tuned.lam == pytest.approx(path.lam)


def test_plugin_selects_the_relevant_covariate() -> None:
    design = _design(n=2000, p=10)
    penalty = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))
    fit = fit_local_lasso(design, penalty)
    assert 0 in selection_set(fit, ThresholdRule.SUPPORT, 2000)


def test_rho_n() -> None:
    assert rho_n(16) == pytest.approx(math.log(math.log(math.log(16))))
    assert rho_n(16) > 0
    with pytest.raises(ConfigError):
        rho_n(15)


def test_scaled_threshold_is_subset_of_support() -> None:
    design = _design(n=1000, p=8)
    fit = fit_local_lasso(design, PenaltyConfig(lam=0.05 * lambda_max(design, PenaltyConfig())))
    support = selection_set(fit, ThresholdRule.SUPPORT, 1000)
    thresholded = selection_set(fit, ThresholdRule.SCALED_THRESHOLD, 1000)
    assert set(thresholded) <= set(support)


def test_post_lasso() -> None:
    """Test that post-Lasso refits on the support and zeroes the rest."""
    design = _design(p=3)
    theta = post_lasso(design, [0, 1, 2, 3, 4])
    assert np.all(theta[5:] == 0.0)
    assert theta[:5] == pytest.approx(weighted_ols(design.restrict([0, 1, 2, 3, 4])).coef)
    with pytest.raises(ConfigError):
        post_lasso(design, [0, 1, 4])


def test_lasso_diagnostics_bound() -> None:
    design = _design(n=1000, p=4)
    fit = fit_local_lasso(design, PenaltyConfig(lam=0.3 * lambda_max(design, PenaltyConfig())))
    diagnostics = lasso_diagnostics(design, fit)
    assert diagnostics.min_eigenvalue > 0
    assert diagnostics.support_size == 4 + len(fit.selected_covariates)
    assert diagnostics.deviation <= diagnostics.bound + 1e-8


def test_selection_sources() -> None:
    design = _design(n=1500, p=6)
    penalty = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))
    sources = selection_sources(design, penalty, 1500)
    assert 0 in sources.partial
    assert sources.pick(SelectionSource.PARTIAL) == sources.partial
    assert sources.pick("full") == sources.full
    assert all(0 <= j < 6 for j in sources.full)


def test_plugin_core_for_a_single_covariate() -> None:
    assert plugin_lambda_core(100, 1) == pytest.approx(0.3619, abs=1e-4)

    rng = np.random.default_rng(6)
    x = rng.uniform(-1, 1, 100)
    z = rng.standard_normal((100, 1))
    y = 0.5 * (x >= 0) + x + 0.3 * z[:, 0] + 0.2 * rng.standard_normal(100)
    design = build_design(Sample(x=x, y=y, z=z), 2.0, covariate_subset=(0,))
    assert design.n_loc == 100
    assert select_lambda(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN)) == pytest.approx(
        0.3619, abs=1e-4
    )


def test_plugin_loadings_use_columns_net_of_the_base_block() -> None:
    """Test that a covariate shifted by a base regressor keeps its loading."""
    rng = np.random.default_rng(10)
    x = rng.uniform(-1, 1, 600)
    z = rng.standard_normal((600, 1))
    y = 0.5 * (x >= 0) + 0.2 * rng.standard_normal(600)
    shifted = np.column_stack([z[:, 0] + 5.0 + 3.0 * x])
    plain = build_design(Sample(x=x, y=y, z=z), 0.8, covariate_subset=(0,))
    moved = build_design(Sample(x=x, y=y, z=shifted), 0.8, covariate_subset=(0,))

    tuned = [tune_penalty(d, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN)) for d in (plain, moved)]
    assert tuned[0].loadings is not None and tuned[1].loadings is not None
    assert tuned[1].loadings[4] == pytest.approx(tuned[0].loadings[4], rel=1e-8)

    resid = pilot_residuals(moved)
    raw = plugin_loadings(moved, resid)
    problem = ProfiledProblem(moved, frozenset(range(4)))
    scored = np.column_stack([np.zeros((600, 4)), problem.partialled_columns])
    net = plugin_loadings(moved, resid, scored)
    assert net[4] < raw[4]


def test_correlated_residuals_start_from_the_strongest_covariate() -> None:
    design = _design(n=1000, p=6)
    problem = ProfiledProblem(design, frozenset(range(4)))
    resid = correlated_residuals(problem, 1)
    assert resid is not None
    expected = post_lasso(design, [0, 1, 2, 3, 4])
    assert resid == pytest.approx(design.response - design.g @ expected, abs=1e-8)
    assert correlated_residuals(problem, 0) is None


def test_plugin_keeps_the_relevant_covariate_in_small_windows() -> None:
    selected = 0
    for seed in range(20):
        design = _design(n=300, p=5, seed=seed, h=0.4)
        tuned = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))
        fit = fit_local_lasso(design, tuned)
        selected += 0 in selection_set(fit, ThresholdRule.SUPPORT, 300)
    assert selected == 20


def test_selection_rules_on_a_handmade_fit() -> None:
    """Test both rules on coefficients (5, 1e-4) with lam * rho_n * 2 = 0.01."""
    n = 500
    assert rho_n(n) == pytest.approx(0.6027, abs=1e-4)
    lam = 0.01 / (2 * rho_n(n))
    theta = np.array([0.1, 0.5, 0.2, 0.0, 5.0, 1e-4])
    fit = LassoFit(
        theta=theta,
        support=(0, 1, 2, 4, 5),
        lambda_used=lam,
        objective=0.0,
        iterations=1,
        converged=True,
        loadings=np.array([0.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        unpenalized=(0, 1, 2, 3),
        base_columns=4,
        covariate_index=(0, 1),
        column_labels=("1", "T", "X", "TX", "first", "second"),
    )
    assert selection_set(fit, ThresholdRule.SCALED_THRESHOLD, n) == (0,)
    assert selection_set(fit, ThresholdRule.SUPPORT, n) == (0, 1)


def test_cross_validation_on_pure_noise_prefers_heavy_penalties() -> None:
    upper = 0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        x = rng.uniform(-1, 1, 400)
        z = rng.standard_normal((400, 5))
        y = rng.standard_normal(400)
        design = build_design(Sample(x=x, y=y, z=z), 1.0, covariate_subset=range(5))
        template = PenaltyConfig(lambda_rule=LambdaRule.CROSS_VALIDATION, cv_grid_size=20)
        upper += cross_validation_path(design, template).chosen_index < 10
    assert upper >= 16


def test_l1_error_shrinks_with_the_sample_size() -> None:
    """Test that the plug-in Lasso's coefficient error falls as n grows."""

    def mean_error(n: int) -> float:
        errors = []
        for seed in range(5):
            design = _design(n=n, p=5, seed=seed)
            tuned = tune_penalty(design, PenaltyConfig(lambda_rule=LambdaRule.PLUGIN))
            fit = fit_local_lasso(design, tuned)
            truth = np.array([0.8, 0.0, 0.0, 0.0, 0.0])
            errors.append(float(np.sum(np.abs(fit.gamma - truth))))
        return float(np.mean(errors))

    small, large = mean_error(500), mean_error(8000)
    assert large < small
    assert large < 0.1
