"""Tests for the simulation designs, Monte Carlo engine and tables."""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
import pytest

from rd_lasso.errors import ConfigError, OutputError
from rd_lasso.rdd import BandwidthMode, Method, MethodSpec
from rd_lasso.sim import (
    TABLE_COLUMNS,
    Dgp,
    DgpSpec,
    McSummary,
    ReplicationOutcome,
    conditional_mean,
    draw_sample,
    emit_tables,
    mu_z,
    normality_test,
    pi_coefficients,
    render_summaries,
    run_monte_carlo,
    studentized_statistics,
    summaries_frame,
    tables_csv,
    true_tau,
)
from rd_lasso.sim.dgp import error_covariance
from rd_lasso.sim.engine import summarize_method

STANDARD_ONLY: Tuple[MethodSpec, ...] = (
    MethodSpec("Standard", Method.STANDARD, BandwidthMode.AUTO_WITHOUT_COVARIATES),
)
TWO_METHODS: Tuple[MethodSpec, ...] = STANDARD_ONLY + (
    MethodSpec("Selection", Method.COVARIATE_SELECTION, BandwidthMode.ADAPTIVE),
)


@pytest.fixture(scope="module")
def small_run() -> McSummary:
    spec = DgpSpec(Dgp.DGP2, n=300, p=3, seed=5)
    return run_monte_carlo(spec, 4, TWO_METHODS)


def test_true_tau() -> None:
    assert true_tau(DgpSpec(Dgp.DGP1, 500, 5)) == pytest.approx(0.04)
    expected = 0.02 + 0.06 * 0.49
    assert true_tau(DgpSpec(Dgp.DGP2, 500, 5)) == pytest.approx(expected)
    assert true_tau(DgpSpec(Dgp.DGP3, 500, 5)) == pytest.approx(expected)


@pytest.mark.parametrize("dgp", list(Dgp))
def test_conditional_mean_jump_matches_true_tau(dgp: Dgp) -> None:
    spec = DgpSpec(dgp, 500, 5)
    right = conditional_mean(spec, [0.0])[0]
    left = conditional_mean(spec, [-1e-12])[0]
    assert right - left == pytest.approx(true_tau(spec), abs=1e-9)


def test_covariate_mean_is_continuous() -> None:
    assert mu_z([0.0])[0] == pytest.approx(0.49)
    assert mu_z([-1e-12])[0] == pytest.approx(0.49)
    left_end = 0.49 - 1.06 + 5.74 - 17.14 + 19.75 - 7.47
    assert mu_z([-1.0])[0] == pytest.approx(left_end)


def test_pi_coefficients() -> None:
    assert pi_coefficients(Dgp.DGP2, 3) == pytest.approx([0.2, 0.04, 0.008])
    assert pi_coefficients(Dgp.DGP3, 3) == pytest.approx([0.5, 0.25, 0.125])
    assert np.all(pi_coefficients(Dgp.DGP1, 4) == 0.0)


def test_dgp_spec_validation() -> None:
    with pytest.raises(ConfigError):
        DgpSpec(Dgp.DGP1, n=49, p=5)
    with pytest.raises(ConfigError):
        DgpSpec(Dgp.DGP2, n=500, p=0)
    with pytest.raises(ConfigError):
        DgpSpec(Dgp.DGP1, n=500, p=5, seed=-1)
    assert DgpSpec("dgp1", n=500, p=0).dgp is Dgp.DGP1


def test_draw_sample_is_reproducible() -> None:
    """Test that (spec, replication) fixes the sample."""
    spec = DgpSpec(Dgp.DGP3, n=400, p=3, seed=9)
    first = draw_sample(spec, 2)
    again = draw_sample(spec, 2)
    other = draw_sample(spec, 3)
    assert np.array_equal(first.x, again.x)
    assert np.array_equal(first.y, again.y)
    assert np.array_equal(first.covariates, again.covariates)
    assert not np.array_equal(first.x, other.x)

    assert first.covariate_names == ("z", "w1", "w2")
    assert first.p == 3
    assert np.all((first.x >= -1.0) & (first.x <= 1.0))
    assert draw_sample(DgpSpec(Dgp.DGP1, n=100, p=0), 0).p == 0


def test_w_block_correlation() -> None:
    sample = draw_sample(DgpSpec(Dgp.DGP2, n=20000, p=4, seed=1), 0)
    w = sample.covariates[:, 1:]
    corr = np.corrcoef(w, rowvar=False)
    assert corr[0, 1] == pytest.approx(0.5, abs=0.03)
    assert corr[0, 2] == pytest.approx(0.25, abs=0.03)


def test_run_monte_carlo_is_deterministic(small_run: McSummary) -> None:
    spec = small_run.spec
    again = run_monte_carlo(spec, 4, TWO_METHODS)
    assert [o.tau_hat for o in again.outcomes] == [o.tau_hat for o in small_run.outcomes]
    assert [(o.replication, o.label) for o in small_run.outcomes] == [
        (r, label) for r in range(4) for label in ("Standard", "Selection")
    ]
    assert small_run.true_tau == pytest.approx(true_tau(spec))
    assert small_run.record("Standard").successes + small_run.record("Standard").failures == 4
    with pytest.raises(KeyError):
        small_run.record("missing")


def test_single_replication_summary() -> None:
    spec = DgpSpec(Dgp.DGP1, n=300, p=2, seed=1)
    summary = run_monte_carlo(spec, 1, STANDARD_ONLY)
    record = summary.record("Standard")
    outcome = summary.outcomes[0]
    assert record.bias == pytest.approx(outcome.tau_hat - summary.true_tau)
    assert record.rmse == pytest.approx(abs(record.bias))
    assert record.h_sd == 0.0
    assert record.coverage in (0.0, 1.0)


def test_run_monte_carlo_validation() -> None:
    spec = DgpSpec(Dgp.DGP1, n=300, p=2)
    with pytest.raises(ConfigError):
        run_monte_carlo(spec, 0)
    with pytest.raises(ConfigError):
        run_monte_carlo(spec, 1, level=1.0)


def test_summarize_method_excludes_failures() -> None:
    outcomes = [
        ReplicationOutcome(0, "A", tau_hat=1.1, covered=True, length=0.4, h=0.3, selected=2),
        ReplicationOutcome(1, "A", tau_hat=0.7, covered=False, length=0.6, h=0.5, selected=4),
        ReplicationOutcome(2, "A", error="SingularDesignError: singular"),
        ReplicationOutcome(0, "B", error="EmptySideError: empty"),
    ]
    record = summarize_method("A", outcomes, 1.0)
    assert record.successes == 2
    assert record.failures == 1
    assert record.bias == pytest.approx(-0.1)
    assert record.rmse == pytest.approx(math.sqrt((0.01 + 0.09) / 2))
    assert record.coverage == 0.5
    assert record.coverage_se == pytest.approx(math.sqrt(0.25 / 2))
    assert record.mean_length == pytest.approx(0.5)
    assert (record.selected_min, record.selected_max) == (2, 4)

    failed = summarize_method("B", outcomes, 1.0)
    assert failed.successes == 0 and failed.failures == 1
    assert math.isnan(failed.bias)


def test_tables(small_run: McSummary, tmp_path: Path) -> None:
    frame = summaries_frame([small_run])
    assert list(frame.columns) == TABLE_COLUMNS
    assert frame["method"].tolist() == ["Standard", "Selection"]
    assert set(frame["dgp"]) == {"dgp2"}

    text = tables_csv([small_run])
    assert text.splitlines()[0] == ",".join(TABLE_COLUMNS)

    path = emit_tables([small_run], tmp_path / "nested" / "tables.csv")
    assert pd.read_csv(path).shape == (2, len(TABLE_COLUMNS))

    with pytest.raises(OutputError):
        summaries_frame([])
    with pytest.raises(OutputError):
        emit_tables([small_run], tmp_path)


def test_render_summaries(small_run: McSummary) -> None:
    records = json.loads(render_summaries([small_run], "json"))
    assert [r["method"] for r in records] == ["Standard", "Selection"]
    assert pd.read_csv(io.StringIO(render_summaries([small_run], "csv"))).shape[0] == 2
    assert "Monte Carlo summary" in render_summaries([small_run], "text")


def test_normality_test(small_run: McSummary) -> None:
    values = studentized_statistics(small_run, "Standard")
    assert values.shape[0] == small_run.record("Standard").successes
    statistic, p_value = normality_test(small_run, "Standard")
    assert 0.0 <= statistic <= 1.0
    assert 0.0 <= p_value <= 1.0
    with pytest.raises(ConfigError):
        normality_test(small_run, "missing")


@pytest.mark.slow
def test_thread_count_does_not_change_results() -> None:
    spec = DgpSpec(Dgp.DGP1, n=500, p=5, seed=7)
    serial = run_monte_carlo(spec, 6, TWO_METHODS, threads=1)
    parallel = run_monte_carlo(spec, 6, TWO_METHODS, threads=2)
    assert [o.tau_hat for o in serial.outcomes] == [o.tau_hat for o in parallel.outcomes]
    assert summaries_frame([serial]).equals(summaries_frame([parallel]))


def test_draw_sample_moments() -> None:
    """Test the running-variable mean and the outcome/covariate error correlation."""
    spec = DgpSpec(Dgp.DGP1, n=40000, p=1, seed=3)
    sample = draw_sample(spec, 0)
    assert float(sample.x.mean()) == pytest.approx(-1.0 / 3.0, abs=0.01)

    eps_y = sample.y - conditional_mean(spec, sample.x)
    eps_z = sample.covariates[:, 0] - mu_z(sample.x)
    assert float(np.corrcoef(eps_y, eps_z)[0, 1]) == pytest.approx(0.2692, abs=0.02)

    covariance = error_covariance()
    implied = covariance[0, 1] / math.sqrt(covariance[0, 0] * covariance[1, 1])
    assert implied == pytest.approx(0.2692, abs=1e-4)
