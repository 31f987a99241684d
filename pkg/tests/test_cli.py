"""Tests for the rdlasso command-line interface."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd
import pytest
from typer.testing import CliRunner

from rd_lasso import __version__
from rd_lasso.cli import app
from rd_lasso.sim import TABLE_COLUMNS

runner = CliRunner()

COLUMNS = ["--cutoff", "0", "--outcome", "y", "--running", "x", "--covariates", "all-others"]


def _estimate_json(sample_csv: Path, out: Path, *extra: str) -> Dict[str, Any]:
    result = runner.invoke(
        app,
        ["estimate", str(sample_csv), *COLUMNS, "--format", "json", "--output", str(out), *extra],
    )
    assert result.exit_code == 0, result.output
    payload: Dict[str, Any] = json.loads(out.read_text(encoding="utf-8"))
    return payload


def test_estimate_writes_json(sample_csv: Path, tmp_path: Path) -> None:
    payload = _estimate_json(sample_csv, tmp_path / "out" / "estimate.json")
    assert payload["method"] == "covariate_selection"
    assert payload["design"] == "sharp"
    assert "z0" in payload["selected_labels"]
    assert payload["ci_lower"] < payload["tau_bc"] < payload["ci_upper"]
    assert payload["level"] == 0.95
    assert payload["n_minus"] + payload["n_plus"] <= 1000


def test_huge_penalty_matches_standard(sample_csv: Path, tmp_path: Path) -> None:
    selection = _estimate_json(sample_csv, tmp_path / "a.json", "--lambda", "1e6")
    standard = _estimate_json(sample_csv, tmp_path / "b.json", "--method", "standard")
    assert selection["selected"] == []
    assert selection["tau_hat"] == pytest.approx(standard["tau_hat"], abs=1e-12)
    assert selection["ci_lower"] == pytest.approx(standard["ci_lower"], abs=1e-12)


def test_estimate_text_output(sample_csv: Path) -> None:
    result = runner.invoke(app, ["estimate", str(sample_csv), *COLUMNS, "--method", "standard"])
    assert result.exit_code == 0
    assert "Robust 95% CI" in result.output
    assert "None" in result.output


def test_compare_csv(sample_csv: Path, tmp_path: Path) -> None:
    out = tmp_path / "compare.csv"
    result = runner.invoke(
        app, ["compare", str(sample_csv), *COLUMNS, "--format", "csv", "--output", str(out)]
    )
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert len(frame) == 8
    assert set(frame["hb_restricted"]) == {True, False}


@pytest.mark.parametrize(
    "args,code",
    [
        (["--cutoff", "0", "--outcome", "y", "--running", "x", "--covariates", "z0,missing"], 3),
        (["--outcome", "y", "--running", "x"], 2),
        (COLUMNS + ["--bandwidth", "h=-0.3"], 2),
        (COLUMNS + ["--method", "ridge"], 2),
        (COLUMNS + ["--design", "fuzzy"], 2),
    ],
)
def test_estimate_exit_codes(sample_csv: Path, args: List[str], code: int) -> None:
    result = runner.invoke(app, ["estimate", str(sample_csv), *args])
    assert result.exit_code == code


def test_missing_input_file(tmp_path: Path) -> None:
    result = runner.invoke(app, ["estimate", str(tmp_path / "absent.csv"), *COLUMNS])
    assert result.exit_code == 5


def test_unwritable_output(sample_csv: Path, tmp_path: Path) -> None:
    result = runner.invoke(
        app, ["estimate", str(sample_csv), *COLUMNS, "--method", "standard", "--output", str(tmp_path)]
    )
    assert result.exit_code == 5


def test_simulate_is_reproducible(tmp_path: Path) -> None:
    """Test that a fixed seed reproduces the table byte for byte."""
    outputs = []
    for name in ("first.csv", "second.csv"):
        out = tmp_path / name
        result = runner.invoke(
            app,
            ["simulate", "--dgp", "dgp1", "--p", "2", "--n", "200", "--reps", "3", "--seed", "4",
             "--output", str(out)],
        )
        assert result.exit_code == 0, result.output
        outputs.append(out.read_text(encoding="utf-8"))
    assert outputs[0] == outputs[1]
    frame = pd.read_csv(tmp_path / "first.csv")
    assert list(frame.columns) == TABLE_COLUMNS
    assert len(frame) == 4


def test_simulate_requires_design() -> None:
    result = runner.invoke(app, ["simulate", "--p", "5"])
    assert result.exit_code == 2
    result = runner.invoke(app, ["simulate", "--dgp", "dgp1", "--p", "5", "--lambda", "0.1"])
    assert result.exit_code == 2


@pytest.mark.slow
def test_simulate_default_sample_size(tmp_path: Path) -> None:
    out = tmp_path / "tables.csv"
    result = runner.invoke(
        app,
        ["simulate", "--dgp", "dgp1", "--p", "5", "--n", "500", "--reps", "50", "--seed", "7",
         "--threads", "auto", "--output", str(out)],
    )
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert (frame["Reps"] == 50).all()
    assert (frame["Failures"] <= 2).all()
    assert frame["CP"].between(0.0, 1.0).all()


def test_version() -> None:
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.output
