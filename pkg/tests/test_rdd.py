"""Tests for the sharp, fuzzy and kink estimators, inference and reporting."""

from __future__ import annotations

from dataclasses import replace
import io
import json
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from rd_lasso.errors import ConfigError, WeakDiscontinuityError
from rd_lasso.kernelfit import Design, Sample
from rd_lasso.lasso import LambdaRule
from rd_lasso.localpoly import BandwidthPair, bias_variance_estimates
from rd_lasso.rdd import (
    BandwidthMode,
    DesignKind,
    Method,
    OutputFormat,
    RddEstimate,
    RddRequest,
    compare_methods,
    critical_value,
    estimate,
    estimate_fuzzy,
    estimate_kink,
    estimate_sharp,
    relative_efficiency,
    render_comparison,
    render_estimate,
    robust_ci,
)
from rd_lasso.rdd import fuzzy
from rd_lasso.rdd.pipeline import SelectionOutcome
from tests.conftest import TRUE_JUMP, make_sharp_sample


@pytest.fixture(scope="module")
def large_sample() -> Sample:
    return make_sharp_sample(n=4000, p=5, seed=17)


@pytest.fixture(scope="module")
def selection_estimate(large_sample: Sample) -> RddEstimate:
    return estimate(RddRequest(sample=large_sample))


def _assert_interval_consistent(result: RddEstimate) -> None:
    z = critical_value(result.level)
    assert result.ci[0] == pytest.approx(result.tau_bc - z * result.se_robust, abs=1e-10)
    assert result.ci[1] == pytest.approx(result.tau_bc + z * result.se_robust, abs=1e-10)


def test_robust_ci_formula() -> None:
    interval = robust_ci(1.0, 0.2, 4.0, 100.0, 0.95)
    z = norm.ppf(0.975)
    assert interval.tau_bc == pytest.approx(0.8)
    assert interval.se == pytest.approx(0.2)
    assert interval.bounds == pytest.approx((0.8 - z * 0.2, 0.8 + z * 0.2))
    assert interval.p_value == pytest.approx(2 * norm.sf(4.0))
    assert interval.t_stat == pytest.approx(4.0)


def test_robust_ci_degenerate_and_invalid() -> None:
    flat = robust_ci(0.5, 0.1, 0.0, 10.0, 0.9)
    assert flat.bounds == (pytest.approx(0.4), pytest.approx(0.4))
    assert flat.p_value == 0.0
    assert robust_ci(0.1, 0.1, 0.0, 10.0, 0.9).p_value == 1.0

    with pytest.raises(ConfigError):
        robust_ci(0.0, 0.0, -1.0, 10.0, 0.95)
    with pytest.raises(ConfigError):
        robust_ci(0.0, 0.0, 1.0, 0.0, 0.95)
    with pytest.raises(ConfigError):
        critical_value(1.0)


def test_critical_value() -> None:
    assert critical_value(0.95) == pytest.approx(1.959964, abs=1e-6)
    assert critical_value(0.9) == pytest.approx(1.644854, abs=1e-6)


def test_request_validation(sharp_sample: Sample) -> None:
    """Test that inconsistent requests are rejected."""
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, confidence_level=1.0)
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, design_kind=DesignKind.FUZZY)
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, design_kind=DesignKind.KINK)
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, design_kind=DesignKind.KINK, kink_denominator=0.0)
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, bandwidth_mode=BandwidthMode.FIXED)
    with pytest.raises(ConfigError):
        RddRequest(
            sample=sharp_sample, bandwidth_mode="fixed", fixed_h=0.3, fixed_b=0.5, hb_restricted=True
        )
    with pytest.raises(ConfigError):
        RddRequest(sample=sharp_sample, lambda_rule=LambdaRule.FIXED)

    request = RddRequest(sample=sharp_sample, method="standard", bandwidth_mode="fixed", fixed_h=0.3)
    assert request.method is Method.STANDARD
    assert request.fixed_b == 0.3


def test_standard_estimate(sharp_sample: Sample) -> None:
    result = estimate(RddRequest(sample=sharp_sample, method=Method.STANDARD))
    assert result.method_used is Method.STANDARD
    assert result.selected == ()
    assert result.lambda_used is None
    assert abs(result.tau_hat - TRUE_JUMP) < 4 * result.se_conventional
    assert result.se_robust > 0
    assert result.ci[0] < result.ci[1]
    assert (result.n_minus, result.n_plus) == sharp_sample.effective_counts(result.bandwidths.h)
    _assert_interval_consistent(result)


def test_selection_without_covariates_is_standard(plain_sample: Sample) -> None:
    selection = estimate(RddRequest(sample=plain_sample))
    standard = estimate(RddRequest(sample=plain_sample, method=Method.STANDARD))
    assert selection.method_used is Method.STANDARD
    assert selection.tau_hat == standard.tau_hat
    assert selection.ci == standard.ci


def test_huge_penalty_returns_standard_estimate(sharp_sample: Sample) -> None:
    """Test that an empty selection falls back to the standard estimator."""
    selection = estimate(
        RddRequest(sample=sharp_sample, lambda_rule=LambdaRule.FIXED, lambda_value=1e6)
    )
    standard = estimate(RddRequest(sample=sharp_sample, method=Method.STANDARD))
    assert selection.selected == ()
    assert selection.method_used is Method.STANDARD
    assert selection.lambda_used == 1e6
    assert selection.tau_hat == pytest.approx(standard.tau_hat, abs=1e-12)
    assert selection.ci == pytest.approx(standard.ci, abs=1e-12)


def test_selection_finds_the_relevant_covariate(selection_estimate: RddEstimate) -> None:
    result = selection_estimate
    assert result.method_used is Method.COVARIATE_SELECTION
    assert 0 in result.selected
    assert "z0" in result.selected_labels
    assert result.lasso_converged is True
    assert result.lambda_used is not None and result.lambda_used > 0
    assert result.selection_partial is not None and 0 in result.selection_partial
    assert abs(result.tau_hat - TRUE_JUMP) < 0.15
    _assert_interval_consistent(result)


def test_selection_tightens_the_interval(large_sample: Sample, selection_estimate: RddEstimate) -> None:
    standard = estimate(RddRequest(sample=large_sample, method=Method.STANDARD))
    assert selection_estimate.ci_length < standard.ci_length
    assert relative_efficiency(selection_estimate, standard) < 1.0
    assert relative_efficiency(standard, standard) == 1.0


def test_adjusted_uses_every_covariate(sharp_sample: Sample) -> None:
    result = estimate(RddRequest(sample=sharp_sample, method=Method.COVARIATE_ADJUSTED))
    assert result.method_used is Method.COVARIATE_ADJUSTED
    assert result.selected == (0, 1, 2)
    assert result.selected_labels == ("z0", "z1", "z2")


def test_fixed_bandwidths(sharp_sample: Sample) -> None:
    result = estimate(
        RddRequest(sample=sharp_sample, method="standard", bandwidth_mode="fixed", fixed_h=0.4)
    )
    assert (result.bandwidths.h, result.bandwidths.b) == (0.4, 0.4)
    assert (result.n_minus, result.n_plus) == sharp_sample.effective_counts(0.4)

    wider_b = estimate(
        RddRequest(
            sample=sharp_sample, method="standard", bandwidth_mode="fixed", fixed_h=0.4, fixed_b=0.6
        )
    )
    assert wider_b.bandwidths.b == 0.6
    assert wider_b.tau_hat == pytest.approx(result.tau_hat)


def test_restricted_bandwidths(sharp_sample: Sample) -> None:
    result = estimate(RddRequest(sample=sharp_sample, method=Method.STANDARD, hb_restricted=True))
    assert result.bandwidths.restricted
    assert result.bandwidths.b == result.bandwidths.h


def test_fuzzy_with_full_compliance_matches_sharp(sharp_sample: Sample) -> None:
    """Test that take-up equal to assignment reproduces the sharp estimate."""
    compliant = Sample(
        x=sharp_sample.x,
        y=sharp_sample.y,
        z=sharp_sample.z,
        w=sharp_sample.treated.astype(float),
        covariate_names=sharp_sample.covariate_names,
    )
    common = dict(sample=compliant, method=Method.STANDARD, bandwidth_mode="fixed", fixed_h=0.5)
    fuzzy = estimate(RddRequest(design_kind=DesignKind.FUZZY, **common))
    sharp = estimate(RddRequest(**common))
    assert fuzzy.design_kind is DesignKind.FUZZY
    assert fuzzy.tau_hat == pytest.approx(sharp.tau_hat, rel=1e-9)
    assert fuzzy.tau_bc == pytest.approx(sharp.tau_bc, rel=1e-8)
    assert fuzzy.se_robust == pytest.approx(sharp.se_robust, rel=1e-8)


def test_fuzzy_without_take_up_jump(sharp_sample: Sample) -> None:
    never = Sample(x=sharp_sample.x, y=sharp_sample.y, w=np.zeros(sharp_sample.n))
    request = RddRequest(
        sample=never, design_kind="fuzzy", method="standard", bandwidth_mode="fixed", fixed_h=0.5
    )
    with pytest.raises(WeakDiscontinuityError):
        estimate_fuzzy(request)


def test_fuzzy_selection_runs() -> None:
    rng = np.random.default_rng(12)
    base = make_sharp_sample(n=3000, p=4, seed=12)
    complier = rng.uniform(size=base.n) < 0.7
    w = np.where(complier, base.treated, rng.uniform(size=base.n) < 0.2).astype(float)
    y = base.y + (w - base.treated) * TRUE_JUMP
    sample = Sample(x=base.x, y=y, z=base.z, w=w, covariate_names=base.covariate_names)

    result = estimate(RddRequest(sample=sample, design_kind=DesignKind.FUZZY))
    assert 0 in result.selected
    assert abs(result.tau_hat - TRUE_JUMP) < 0.3
    _assert_interval_consistent(result)


def _kink_sample(n: int = 3000, seed: int = 4) -> Sample:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, n)
    y = 0.2 * x + 0.8 * np.maximum(x, 0.0) + 0.1 * x**2 + 0.05 * rng.standard_normal(n)
    return Sample(x=x, y=y)


def test_kink_estimate() -> None:
    """Test the slope change divided by the policy kink."""
    sample = _kink_sample()
    request = RddRequest(
        sample=sample,
        design_kind=DesignKind.KINK,
        kink_denominator=2.0,
        bandwidth_mode=BandwidthMode.FIXED,
        fixed_h=0.6,
    )
    result = estimate_kink(request)
    assert result.method_used is Method.STANDARD
    assert result.tau_hat == pytest.approx(0.4, abs=0.05)
    _assert_interval_consistent(result)

    halved = estimate(replace(request, kink_denominator=4.0))
    assert halved.tau_hat == pytest.approx(result.tau_hat / 2, rel=1e-10)
    assert halved.se_robust == pytest.approx(result.se_robust / 2, rel=1e-10)
    assert halved.ci_length == pytest.approx(result.ci_length / 2, rel=1e-10)


def test_kink_with_automatic_bandwidth() -> None:
    result = estimate(RddRequest(sample=_kink_sample(), design_kind="kink", kink_denominator=1.0))
    assert result.bandwidths.h > 0
    assert result.ci[0] < result.ci[1]


def test_estimators_reject_other_designs(sharp_sample: Sample) -> None:
    request = RddRequest(sample=sharp_sample)
    with pytest.raises(ConfigError):
        estimate_fuzzy(request)
    with pytest.raises(ConfigError):
        estimate_kink(request)
    with pytest.raises(ConfigError):
        estimate_sharp(replace(request, design_kind=DesignKind.KINK, kink_denominator=1.0))


def test_compare_methods(sharp_sample: Sample) -> None:
    """Test the four columns under both h/b settings."""
    comparison = compare_methods(RddRequest(sample=sharp_sample))
    assert len(comparison.columns) == 8

    for restricted in (False, True):
        columns = comparison.for_setting(restricted)
        assert [c.spec.method for c in columns] == [
            Method.STANDARD,
            Method.COVARIATE_ADJUSTED,
            Method.COVARIATE_ADJUSTED,
            Method.COVARIATE_SELECTION,
        ]
        reference = columns[0]
        assert reference.ci_length_change == pytest.approx(0.0)
        assert reference.relative_efficiency == pytest.approx(1.0)
        for column in columns:
            assert column.estimate is not None
            assert column.estimate.bandwidths.restricted is restricted

    adjusted = comparison.for_setting(False)[1]
    assert adjusted.estimate is not None and adjusted.estimate.selected == (0, 1, 2)


def test_render_estimate_formats(sharp_sample: Sample) -> None:
    result = estimate(RddRequest(sample=sharp_sample, method="standard"))

    record = json.loads(render_estimate(result, OutputFormat.JSON))
    assert record["tau_hat"] == pytest.approx(result.tau_hat)
    assert record["ci_lower"] == pytest.approx(result.ci[0])
    assert record["selected"] == []
    assert record["lambda"] is None

    frame = pd.read_csv(io.StringIO(render_estimate(result, OutputFormat.CSV)))
    assert len(frame) == 1
    assert frame.loc[0, "h"] == pytest.approx(result.bandwidths.h)

    text = render_estimate(result, OutputFormat.TEXT)
    assert "Robust 95% CI" in text
    assert "None" in text


def test_render_comparison_formats(sharp_sample: Sample) -> None:
    comparison = compare_methods(
        RddRequest(sample=sharp_sample, bandwidth_mode="fixed", fixed_h=0.5)
    )
    records = json.loads(render_comparison(comparison, "json"))
    assert len(records) == 8
    assert {r["hb_restricted"] for r in records} == {False, True}
    assert all(r["h"] == 0.5 for r in records)

    frame = pd.read_csv(io.StringIO(render_comparison(comparison, "csv")))
    assert len(frame) == 8

    text = render_comparison(comparison, "text")
    assert "h/b unrestricted" in text
    assert "h/b = 1" in text
    assert "Relative efficiency" in text
    assert not math.isnan(records[0]["tau_hat"])


def test_standard_estimate_without_covariate_noise(plain_sample: Sample) -> None:
    result = estimate(RddRequest(sample=plain_sample, method=Method.STANDARD))
    assert result.tau_hat == pytest.approx(TRUE_JUMP, abs=0.12)


def test_exact_linear_model_is_recovered() -> None:
    """Test zero-noise recovery of the jump with and without covariates."""
    rng = np.random.default_rng(8)
    x = rng.uniform(-1, 1, 600)
    z = rng.standard_normal((600, 2))
    t = (x >= 0).astype(float)
    y = 1.0 + 0.3 * x + TRUE_JUMP * t + 0.7 * t * x
    fixed = dict(bandwidth_mode=BandwidthMode.FIXED, fixed_h=0.5)

    plain = estimate(RddRequest(sample=Sample(x=x, y=y), method=Method.STANDARD, **fixed))
    assert plain.tau_hat == pytest.approx(TRUE_JUMP, abs=1e-8)

    adjusted = estimate(
        RddRequest(
            sample=Sample(x=x, y=y + z @ [0.8, -0.4], z=z),
            method=Method.COVARIATE_ADJUSTED,
            **fixed,
        )
    )
    assert adjusted.tau_hat == pytest.approx(TRUE_JUMP, abs=1e-8)


def test_exact_kink_is_recovered() -> None:
    """Test that |x| with a policy kink of 2 gives a unit effect."""
    x = np.linspace(-1, 1, 801)
    request = RddRequest(
        sample=Sample(x=x, y=np.abs(x)),
        design_kind=DesignKind.KINK,
        kink_denominator=2.0,
        bandwidth_mode=BandwidthMode.FIXED,
        fixed_h=0.5,
    )
    assert estimate(request).tau_hat == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("method", [Method.STANDARD, Method.COVARIATE_SELECTION])
def test_outcome_shift_leaves_estimate_unchanged(sharp_sample: Sample, method: Method) -> None:
    shifted = Sample(
        x=sharp_sample.x,
        y=sharp_sample.y + 3.0,
        z=sharp_sample.z,
        covariate_names=sharp_sample.covariate_names,
    )
    base = estimate(RddRequest(sample=sharp_sample, method=method))
    moved = estimate(RddRequest(sample=shifted, method=method))
    assert moved.selected == base.selected
    assert moved.bandwidths.h == pytest.approx(base.bandwidths.h, rel=1e-8)
    assert moved.tau_hat == pytest.approx(base.tau_hat, abs=1e-8)


@pytest.mark.parametrize("method", [Method.STANDARD, Method.COVARIATE_ADJUSTED])
def test_translating_running_variable_and_cutoff(sharp_sample: Sample, method: Method) -> None:
    translated = Sample(
        x=sharp_sample.x + 5.0,
        y=sharp_sample.y,
        z=sharp_sample.z,
        cutoff=5.0,
        covariate_names=sharp_sample.covariate_names,
    )
    base = estimate(RddRequest(sample=sharp_sample, method=method))
    moved = estimate(RddRequest(sample=translated, method=method))
    assert moved.bandwidths.h == pytest.approx(base.bandwidths.h, rel=1e-8)
    assert moved.tau_hat == pytest.approx(base.tau_hat, abs=1e-8)


def test_row_order_leaves_bias_and_variance_unchanged(sharp_sample: Sample) -> None:
    order = np.random.default_rng(3).permutation(sharp_sample.n)
    shuffled = Sample(
        x=sharp_sample.x[order],
        y=sharp_sample.y[order],
        z=sharp_sample.z[order],
        covariate_names=sharp_sample.covariate_names,
    )
    pair = BandwidthPair(h=0.4, b=0.6)
    base = bias_variance_estimates(sharp_sample, (0,), [0.8], pair)
    again = bias_variance_estimates(shuffled, (0,), [0.8], pair)
    assert again.bias == pytest.approx(base.bias, rel=1e-9)
    assert again.variance == pytest.approx(base.variance, rel=1e-9)
    assert again.variance_robust == pytest.approx(base.variance_robust, rel=1e-9)
    assert again.bias_spread == pytest.approx(base.bias_spread, rel=1e-9)


def test_doubling_outcome_scales_bias_and_variance(sharp_sample: Sample) -> None:
    doubled = Sample(x=sharp_sample.x, y=2.0 * sharp_sample.y)
    plain = Sample(x=sharp_sample.x, y=sharp_sample.y)
    pair = BandwidthPair(h=0.4, b=0.6)
    base = bias_variance_estimates(plain, (), (), pair)
    scaled = bias_variance_estimates(doubled, (), (), pair)
    assert scaled.bias == pytest.approx(2.0 * base.bias, rel=1e-10)
    assert scaled.variance == pytest.approx(4.0 * base.variance, rel=1e-10)
    assert scaled.variance_robust == pytest.approx(4.0 * base.variance_robust, rel=1e-10)


def test_fuzzy_ratio_of_synthetic_jumps() -> None:
    """Test that a constant effect of 0.4 per unit of take-up is recovered exactly."""
    rng = np.random.default_rng(14)
    x = rng.uniform(-1, 1, 1500)
    w = (rng.uniform(size=x.size) < np.where(x >= 0, 0.7, 0.2)).astype(float)
    y = 1.0 - 0.3 * x + 0.4 * w
    request = RddRequest(
        sample=Sample(x=x, y=y, w=w),
        design_kind=DesignKind.FUZZY,
        method=Method.STANDARD,
        bandwidth_mode=BandwidthMode.FIXED,
        fixed_h=0.5,
    )
    assert estimate(request).tau_hat == pytest.approx(0.4, abs=1e-8)


def test_fuzzy_take_up_selection_shares_the_outcome_level(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that the take-up Lasso reuses the window and penalty level of the outcome Lasso."""
    rng = np.random.default_rng(5)
    base = make_sharp_sample(n=2000, p=3, seed=5)
    w = np.where(rng.uniform(size=base.n) < 0.8, base.treated, 0.0).astype(float)
    sample = Sample(x=base.x, y=base.y, z=base.z, w=w, covariate_names=base.covariate_names)

    calls: List[Tuple[Design, Optional[float], float]] = []
    original = fuzzy.select_on_design

    def recording(
        request: RddRequest, design: Design, *, level: Optional[float] = None
    ) -> SelectionOutcome:
        outcome = original(request, design, level=level)
        calls.append((design, level, outcome.lambda_used))
        return outcome

    monkeypatch.setattr(fuzzy, "select_on_design", recording)
    estimate(RddRequest(sample=sample, design_kind=DesignKind.FUZZY))

    (outcome_design, first_level, outcome_lam), (take_up_design, shared, take_up_lam) = calls
    assert first_level is None
    assert shared == outcome_lam == take_up_lam
    assert np.array_equal(take_up_design.rows, outcome_design.rows)
    assert np.array_equal(take_up_design.g, outcome_design.g)
    assert np.array_equal(take_up_design.response, w[np.asarray(outcome_design.rows)])


def test_relative_efficiency_reflects_explained_variance() -> None:
    """Test that a strong covariate cuts the variance and pure-noise covariates barely move it."""
    fixed = dict(bandwidth_mode=BandwidthMode.FIXED, fixed_h=0.5)
    strong = make_sharp_sample(n=3000, p=3, seed=21)
    noise = make_sharp_sample(n=3000, p=3, seed=21, signal=0.0)

    def ratio(sample: Sample) -> float:
        adjusted = estimate(RddRequest(sample=sample, method=Method.COVARIATE_ADJUSTED, **fixed))
        standard = estimate(RddRequest(sample=sample, method=Method.STANDARD, **fixed))
        return relative_efficiency(adjusted, standard)

    assert ratio(strong) < 0.2
    assert ratio(noise) == pytest.approx(1.0, abs=0.1)
