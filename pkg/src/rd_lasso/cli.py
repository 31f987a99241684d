"""
Command Line Interface for RD estimation with covariate selection

Commands: estimate, compare and simulate.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

import typer
from rich import print as rich_print
from rich.markup import escape

from . import __version__
from .config.logging_config import LoggingConfig, setup_logging
from .config.run_config import Command, load_run_config
from .errors import RdLassoError
from .main import run

app = typer.Typer(
    name="rdlasso",
    help="Regression discontinuity estimation with many covariates via local Lasso selection",
    add_completion=False,
    rich_markup_mode="rich",
)

# Options shared by several commands
OUTPUT = typer.Option(None, "--output", "-o", help="Write the report to this file instead of stdout")
FORMAT = typer.Option("text", "--format", "-f", help="Output format: json, csv or text")
LEVEL = typer.Option(0.95, "--level", help="Confidence level of the robust interval")
HB_RESTRICTED = typer.Option(False, "--hb-restricted", help="Use b = h for the bias correction")
LAMBDA = typer.Option("plugin", "--lambda", help="Penalty level: plugin, cv or a number")
VARIANCE = typer.Option("nn", "--variance", help="Variance estimator: nn or plugin")
NN_NEIGHBORS = typer.Option(3, "--nn-neighbors", help="Neighbors for the nearest-neighbor variance")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Log debug output to stderr")
LOG_FILE = typer.Option(None, "--log-file", help="Also write a rotating debug log to this file")


def _execute(verbose: bool, log_file: Optional[Path], **options: Any) -> None:
    """Configure logging, build the RunConfig and run it, exiting with its code."""
    structured_logger = setup_logging(LoggingConfig.for_cli(verbose, log_file))
    try:
        config = load_run_config(**options)
    except RdLassoError as e:
        rich_print(f"[red]{type(e).__name__}:[/red] {escape(str(e))}")
        raise typer.Exit(e.exit_code)
    code = run(config, structured_logger)
    if code != 0:
        raise typer.Exit(code)


@app.command()
def estimate(
    input_path: Path = typer.Argument(..., help="CSV file with a header row"),
    cutoff: Optional[float] = typer.Option(None, "--cutoff", "-c", help="Cutoff of the running variable"),
    outcome: Optional[str] = typer.Option(None, "--outcome", "-y", help="Outcome column"),
    running: Optional[str] = typer.Option(None, "--running", "-x", help="Running-variable column"),
    takeup: Optional[str] = typer.Option(None, "--takeup", help="Treatment take-up column (fuzzy designs)"),
    covariates: Optional[str] = typer.Option(
        None, "--covariates", help="Comma-separated covariate columns, or all-others"
    ),
    method: str = typer.Option(
        "covariate_selection", "--method", "-m", help="standard, covariate_adjusted or covariate_selection"
    ),
    design: str = typer.Option("sharp", "--design", help="sharp, fuzzy or kink"),
    kink_denominator: Optional[float] = typer.Option(
        None, "--kink-denominator", help="Known slope change of the policy at the cutoff (kink designs)"
    ),
    kernel: str = typer.Option("triangular", "--kernel", "-k", help="triangular, epanechnikov or uniform"),
    bandwidth: str = typer.Option(
        "adaptive", "--bandwidth", "-b", help="auto-nocov, auto-cov, adaptive or h=<v>[,b=<v>]"
    ),
    level: float = LEVEL,
    hb_restricted: bool = HB_RESTRICTED,
    lambda_option: str = LAMBDA,
    selection: str = typer.Option("support", "--selection", help="Selection rule: support or threshold"),
    variance: str = VARIANCE,
    nn_neighbors: int = NN_NEIGHBORS,
    first_n: Optional[int] = typer.Option(None, "--first-n", help="Use only the first N complete rows"),
    output: Optional[Path] = OUTPUT,
    output_format: str = FORMAT,
    verbose: bool = VERBOSE,
    log_file: Optional[Path] = LOG_FILE,
) -> None:
    """Estimate the RD effect on a CSV file."""
    _execute(
        verbose,
        log_file,
        command=Command.ESTIMATE,
        input_path=input_path,
        cutoff=cutoff,
        outcome=outcome,
        running=running,
        takeup=takeup,
        covariates=covariates,
        method=method,
        design=design,
        kink_denominator=kink_denominator,
        kernel=kernel,
        bandwidth=bandwidth,
        level=level,
        hb_restricted=hb_restricted,
        lambda_option=lambda_option,
        selection=selection,
        variance=variance,
        nn_neighbors=nn_neighbors,
        first_n=first_n,
        output_path=output,
        output_format=output_format,
    )


@app.command()
def compare(
    input_path: Path = typer.Argument(..., help="CSV file with a header row"),
    cutoff: Optional[float] = typer.Option(None, "--cutoff", "-c", help="Cutoff of the running variable"),
    outcome: Optional[str] = typer.Option(None, "--outcome", "-y", help="Outcome column"),
    running: Optional[str] = typer.Option(None, "--running", "-x", help="Running-variable column"),
    takeup: Optional[str] = typer.Option(None, "--takeup", help="Treatment take-up column (fuzzy designs)"),
    covariates: Optional[str] = typer.Option(
        None, "--covariates", help="Comma-separated covariate columns, or all-others"
    ),
    design: str = typer.Option("sharp", "--design", help="sharp, fuzzy or kink"),
    kink_denominator: Optional[float] = typer.Option(None, "--kink-denominator", help="Known policy kink"),
    kernel: str = typer.Option("triangular", "--kernel", "-k", help="triangular, epanechnikov or uniform"),
    level: float = LEVEL,
    lambda_option: str = LAMBDA,
    variance: str = VARIANCE,
    nn_neighbors: int = NN_NEIGHBORS,
    first_n: Optional[int] = typer.Option(None, "--first-n", help="Use only the first N complete rows"),
    output: Optional[Path] = OUTPUT,
    output_format: str = FORMAT,
    verbose: bool = VERBOSE,
    log_file: Optional[Path] = LOG_FILE,
) -> None:
    """Compare standard, covariate-adjusted and covariate-selection estimates side by side."""
    _execute(
        verbose,
        log_file,
        command=Command.COMPARE,
        input_path=input_path,
        cutoff=cutoff,
        outcome=outcome,
        running=running,
        takeup=takeup,
        covariates=covariates,
        design=design,
        kink_denominator=kink_denominator,
        kernel=kernel,
        level=level,
        lambda_option=lambda_option,
        variance=variance,
        nn_neighbors=nn_neighbors,
        first_n=first_n,
        output_path=output,
        output_format=output_format,
    )


@app.command()
def simulate(
    dgp: Optional[str] = typer.Option(None, "--dgp", help="Simulation design: dgp1, dgp2 or dgp3"),
    p: Optional[int] = typer.Option(None, "--p", help="Number of covariates handed to the estimators"),
    n: int = typer.Option(500, "--n", help="Sample size per replication"),
    reps: int = typer.Option(1000, "--reps", "-r", help="Number of replications"),
    seed: int = typer.Option(0, "--seed", "-s", help="Base seed"),
    threads: str = typer.Option("1", "--threads", "-t", help="Worker count or auto"),
    level: float = LEVEL,
    hb_restricted: bool = HB_RESTRICTED,
    lambda_option: str = LAMBDA,
    nn_neighbors: int = NN_NEIGHBORS,
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the table CSV to this file"),
    output_format: str = FORMAT,
    verbose: bool = VERBOSE,
    log_file: Optional[Path] = LOG_FILE,
) -> None:
    """Run the Monte Carlo study for one design and covariate count."""
    _execute(
        verbose,
        log_file,
        command=Command.SIMULATE,
        dgp=dgp,
        p=p,
        n=n,
        reps=reps,
        seed=seed,
        threads=threads,
        level=level,
        hb_restricted=hb_restricted,
        lambda_option=lambda_option,
        nn_neighbors=nn_neighbors,
        output_path=output,
        output_format=output_format,
    )


@app.command()
def version() -> None:
    """Show the installed version."""
    rich_print(f"rd-lasso-selection {__version__}")


def main() -> None:
    """Main entry point for the CLI application."""
    app()


if __name__ == "__main__":
    main()
