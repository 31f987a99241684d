"""Rendering of estimates and method comparisons as JSON, CSV or text."""

from __future__ import annotations

from enum import Enum
import io
import json
from typing import Any, Dict, List, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table

from .compare import ComparisonColumn, MethodComparison
from .models import RddEstimate


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


def _render_table(table: Table) -> str:
    buffer = io.StringIO()
    Console(file=buffer, width=140, color_system=None).print(table)
    return buffer.getvalue()


def _fmt(value: float, digits: int = 3) -> str:
    return f"{value:.{digits}f}"


def _selected_text(estimate: RddEstimate) -> str:
    return ", ".join(estimate.selected_labels) if estimate.selected_labels else "None"


def estimate_table(estimate: RddEstimate) -> Table:
    """Two-column rich table for one estimate."""
    pct = int(round(100 * estimate.level))
    table = Table(title=f"RD estimate ({estimate.design_kind.value})", show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Method", estimate.method_used.value)
    table.add_row("Estimate", _fmt(estimate.tau_hat))
    table.add_row("Bias-corrected", _fmt(estimate.tau_bc))
    table.add_row(f"Robust {pct}% CI", f"[{_fmt(estimate.ci[0])}, {_fmt(estimate.ci[1])}]")
    table.add_row("Robust s.e.", _fmt(estimate.se_robust))
    table.add_row("Robust p-value", _fmt(estimate.p_value))
    table.add_row("h", _fmt(estimate.bandwidths.h))
    table.add_row("b", _fmt(estimate.bandwidths.b))
    table.add_row("n-", str(estimate.n_minus))
    table.add_row("n+", str(estimate.n_plus))
    table.add_row("Selected covariates", _selected_text(estimate))
    if estimate.lambda_used is not None:
        table.add_row("Penalty level", f"{estimate.lambda_used:.4g}")
    return table


def comparison_table(columns: Sequence[ComparisonColumn], title: str) -> Table:
    """Rows of the empirical comparison layout, one column per estimator."""
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("", style="cyan")
    for column in columns:
        table.add_column(column.spec.label)

    def row(label: str, cell: Any) -> None:
        table.add_row(label, *[cell(c.estimate, c) if c.estimate is not None else (c.error or "-") for c in columns])

    row("Estimate", lambda e, c: _fmt(e.tau_hat))
    row("Robust CI", lambda e, c: f"[{_fmt(e.ci[0])}, {_fmt(e.ci[1])}]")
    row("CI length change (%)", lambda e, c: "-" if c.ci_length_change is None else f"{c.ci_length_change:.1f}")
    row("Robust p-value", lambda e, c: _fmt(e.p_value))
    row("h", lambda e, c: _fmt(e.bandwidths.h))
    row("b", lambda e, c: _fmt(e.bandwidths.b))
    row("n-", lambda e, c: str(e.n_minus))
    row("n+", lambda e, c: str(e.n_plus))
    row("Selected covariates", lambda e, c: _selected_text(e))
    row("Relative efficiency", lambda e, c: "-" if c.relative_efficiency is None else _fmt(c.relative_efficiency))
    return table


def _csv_ready(record: Dict[str, Any]) -> Dict[str, Any]:
    return {k: ";".join(str(v) for v in value) if isinstance(value, list) else value for k, value in record.items()}


def comparison_records(comparison: MethodComparison) -> List[Dict[str, Any]]:
    """One flat record per column and h/b setting."""
    records: List[Dict[str, Any]] = []
    for column in comparison.columns:
        record: Dict[str, Any] = {
            "column": column.spec.label,
            "hb_restricted": column.restricted,
            "error": column.error,
            "ci_length_change": column.ci_length_change,
            "relative_efficiency": column.relative_efficiency,
        }
        if column.estimate is not None:
            record.update(column.estimate.to_dict())
        records.append(record)
    return records


def render_estimate(estimate: RddEstimate, fmt: OutputFormat) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps(estimate.to_dict(), indent=2) + "\n"
    if fmt is OutputFormat.CSV:
        return str(pd.DataFrame([_csv_ready(estimate.to_dict())]).to_csv(index=False))
    return _render_table(estimate_table(estimate))


def render_comparison(comparison: MethodComparison, fmt: OutputFormat) -> str:
    fmt = OutputFormat(fmt)
    records = comparison_records(comparison)
    if fmt is OutputFormat.JSON:
        return json.dumps(records, indent=2) + "\n"
    if fmt is OutputFormat.CSV:
        return str(pd.DataFrame([_csv_ready(r) for r in records]).to_csv(index=False))
    parts = [
        _render_table(comparison_table(comparison.for_setting(False), "h/b unrestricted")),
        _render_table(comparison_table(comparison.for_setting(True), "h/b = 1")),
    ]
    return "\n".join(p for p in parts if p)
