"""Simulation tables: CSV files and console summaries."""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import pandas as pd
from rich.console import Console
from rich.table import Table

from ..errors import OutputError
from ..rdd.report import OutputFormat
from ..utils.file_utils import write_output
from .engine import McSummary

TABLE_COLUMNS: List[str] = [
    "dgp",
    "p",
    "n",
    "method",
    "Bias",
    "RMSE",
    "CP",
    "CP_SE",
    "Length",
    "h_Mean",
    "h_SD",
    "Selected_Average",
    "Selected_Min",
    "Selected_Max",
    "Failures",
    "Reps",
]


def summaries_frame(summaries: Sequence[McSummary]) -> pd.DataFrame:
    """One row per (dgp, p, method) in a stable column order.

    Raises:
        OutputError: No summaries were given.
    """
    if not summaries:
        raise OutputError("No simulation summaries to tabulate")
    rows: List[Dict[str, Any]] = []
    for summary in summaries:
        for record in summary.records:
            rows.append(
                {
                    "dgp": summary.spec.dgp.value,
                    "p": summary.spec.p,
                    "n": summary.spec.n,
                    "method": record.label,
                    "Bias": record.bias,
                    "RMSE": record.rmse,
                    "CP": record.coverage,
                    "CP_SE": record.coverage_se,
                    "Length": record.mean_length,
                    "h_Mean": record.h_mean,
                    "h_SD": record.h_sd,
                    "Selected_Average": record.selected_mean,
                    "Selected_Min": record.selected_min,
                    "Selected_Max": record.selected_max,
                    "Failures": record.failures,
                    "Reps": summary.reps,
                }
            )
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def tables_csv(summaries: Sequence[McSummary]) -> str:
    """CSV text with three-decimal numerics."""
    return str(summaries_frame(summaries).to_csv(index=False, float_format="%.3f", lineterminator="\n"))


def emit_tables(summaries: Sequence[McSummary], path: Union[str, Path]) -> Path:
    """Write the simulation table CSV to ``path``.

    Raises:
        OutputError: Empty input or the file cannot be written.
    """
    return write_output(Path(path), tables_csv(summaries))


def format_summary_table(summaries: Sequence[McSummary]) -> Table:
    """Rich table with bias, RMSE, coverage, length, bandwidth and selection columns."""
    frame = summaries_frame(summaries)
    table = Table(title="Monte Carlo summary", show_header=True, header_style="bold magenta")
    for name in ("dgp", "p", "method", "Bias", "RMSE", "CP", "Length", "h_Mean", "h_SD", "Selected_Average", "Failures"):
        table.add_column(name, style="cyan" if name in ("dgp", "p", "method") else None)
    for row in frame.itertuples(index=False):
        record = row._asdict()
        table.add_row(
            str(record["dgp"]),
            str(record["p"]),
            str(record["method"]),
            *[f"{record[k]:.3f}" for k in ("Bias", "RMSE", "CP", "Length", "h_Mean", "h_SD", "Selected_Average")],
            str(record["Failures"]),
        )
    return table


def render_summaries(summaries: Sequence[McSummary], fmt: OutputFormat) -> str:
    """Simulation summaries as JSON records, table CSV or a rich text table."""
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps(summaries_frame(summaries).to_dict(orient="records"), indent=2) + "\n"
    if fmt is OutputFormat.CSV:
        return tables_csv(summaries)
    buffer = io.StringIO()
    Console(file=buffer, width=160, color_system=None).print(format_summary_table(summaries))
    return buffer.getvalue()
