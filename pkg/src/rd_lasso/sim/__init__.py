"""Simulation designs, Monte Carlo engine and result tables."""

from ..rdd.compare import MethodSpec, standard_method_grid
from .dgp import (
    Dgp,
    DgpSpec,
    conditional_mean,
    draw_sample,
    mu_1,
    mu_2,
    mu_z,
    pi_coefficients,
    true_tau,
)
from .engine import (
    EstimatorOptions,
    McSummary,
    MethodSummary,
    ReplicationOutcome,
    normality_test,
    run_monte_carlo,
    run_replication,
    studentized_statistics,
)
from .tables import (
    TABLE_COLUMNS,
    emit_tables,
    format_summary_table,
    render_summaries,
    summaries_frame,
    tables_csv,
)

__all__ = [
    "MethodSpec",
    "standard_method_grid",
    "Dgp",
    "DgpSpec",
    "conditional_mean",
    "draw_sample",
    "mu_1",
    "mu_2",
    "mu_z",
    "pi_coefficients",
    "true_tau",
    "EstimatorOptions",
    "McSummary",
    "MethodSummary",
    "ReplicationOutcome",
    "normality_test",
    "run_monte_carlo",
    "run_replication",
    "studentized_statistics",
    "TABLE_COLUMNS",
    "emit_tables",
    "format_summary_table",
    "render_summaries",
    "summaries_frame",
    "tables_csv",
]
