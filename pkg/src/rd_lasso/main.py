"""
Application entry point for RD estimation runs.

Ties CSV ingestion, the estimators, the comparison report and the Monte Carlo
engine to a RunConfig.
"""

from __future__ import annotations

import sys
from typing import Optional

from loguru import logger
from rich.console import Console
from rich.markup import escape

from .config.logging_config import LoggedOperation, LoggingConfig, StructuredLogger, setup_logging
from .config.run_config import Command, RunConfig
from .errors import RdLassoError
from .ingest.csv_loader import load_csv_with_report
from .kernelfit.design import Sample
from .rdd.api import estimate
from .rdd.compare import compare_methods
from .rdd.report import render_comparison, render_estimate
from .sim.engine import EstimatorOptions, run_monte_carlo
from .sim.tables import emit_tables, render_summaries
from .utils.file_utils import write_output


class RdLassoApplication:
    """Runs one configured command and writes its output."""

    def __init__(
        self,
        config: RunConfig,
        structured_logger: Optional[StructuredLogger] = None,
        console: Optional[Console] = None,
    ) -> None:
        self.config: RunConfig = config
        self.structured_logger: StructuredLogger = structured_logger or setup_logging(LoggingConfig())
        self.console: Console = console or Console()

    def _load_sample(self) -> Sample:
        config = self.config
        assert config.input_path is not None and config.mapping is not None and config.cutoff is not None
        sample, report = load_csv_with_report(config.input_path, config.mapping, config.cutoff)
        if config.first_n is not None and config.first_n < sample.n:
            sample = sample.head(config.first_n)
            logger.info(f"Restricted to the first {config.first_n} complete rows")
        self.structured_logger.log_performance_metric(
            "rows_dropped", report.dropped_rows, "rows", total_rows=report.total_rows
        )
        return sample

    def _emit(self, content: str) -> None:
        if self.config.output_path is not None:
            path = write_output(self.config.output_path, content)
            logger.info(f"Wrote {path}")
        else:
            self.console.file.write(content)

    def run_estimate(self) -> None:
        """Estimate on the configured CSV and emit the report."""
        sample = self._load_sample()
        with LoggedOperation(self.structured_logger, "estimate", method=self.config.method.value):
            result = estimate(self.config.to_request(sample))
        self.structured_logger.log_estimate(
            result.method_used.value,
            result.tau_hat,
            result.ci,
            result.bandwidths.h,
            result.bandwidths.b,
            len(result.selected),
            design=result.design_kind.value,
        )
        self._emit(render_estimate(result, self.config.output_format))

    def run_compare(self) -> None:
        """Run the four-column comparison under both h/b settings."""
        sample = self._load_sample()
        with LoggedOperation(self.structured_logger, "compare"):
            comparison = compare_methods(self.config.to_request(sample))
        self._emit(render_comparison(comparison, self.config.output_format))

    def run_simulate(self) -> None:
        """Run the Monte Carlo study; tables go to the output path, the summary to stdout."""
        config = self.config
        assert config.reps is not None
        options = EstimatorOptions(
            hb_restricted=config.hb_restricted,
            lambda_rule=config.lambda_choice.rule,
            settings=config.settings,
        )
        with LoggedOperation(self.structured_logger, "simulate", dgp=config.dgp, p=config.p, n=config.n):
            summary = run_monte_carlo(
                config.dgp_spec(),
                config.reps,
                level=config.level,
                threads=config.threads,
                options=options,
                show_progress=config.output_path is not None,
                structured_logger=self.structured_logger,
            )
        if config.output_path is not None:
            path = emit_tables([summary], config.output_path)
            logger.info(f"Wrote simulation tables to {path}")
        self.console.file.write(render_summaries([summary], config.output_format))

    def execute(self) -> None:
        handlers = {
            Command.ESTIMATE: self.run_estimate,
            Command.COMPARE: self.run_compare,
            Command.SIMULATE: self.run_simulate,
        }
        handlers[self.config.command]()


def run(
    config: RunConfig,
    structured_logger: Optional[StructuredLogger] = None,
    console: Optional[Console] = None,
) -> int:
    """Execute ``config`` and return the process exit code.

    Library errors map to their ``exit_code`` and are printed without a
    traceback; anything else exits with 1.
    """
    err_console = Console(stderr=True)
    try:
        RdLassoApplication(config, structured_logger, console).execute()
        return 0
    except RdLassoError as e:
        logger.error(f"{type(e).__name__}: {e}")
        err_console.print(f"[red]{type(e).__name__}:[/red] {escape(str(e))}")
        return e.exit_code
    except KeyboardInterrupt:
        err_console.print("[yellow]Interrupted[/yellow]")
        return 130
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        err_console.print(f"[red]Unexpected error:[/red] {escape(str(e))}")
        return 1


def main() -> int:
    """Entry point when run as a script; the CLI is the primary interface."""
    from .cli import app

    app()
    return 0


if __name__ == "__main__":
    sys.exit(main())
