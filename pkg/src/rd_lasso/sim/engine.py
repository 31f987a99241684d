"""Parallel Monte Carlo runs of the RD estimators on simulated designs."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from numpy.typing import NDArray
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn
from scipy import stats

from ..config.logging_config import StructuredLogger
from ..config.settings import EstimationSettings
from ..errors import ConfigError, RdLassoError
from ..lasso.penalty import LambdaRule
from ..rdd.api import estimate
from ..rdd.compare import MethodSpec, standard_method_grid
from ..rdd.models import RddRequest
from .dgp import DgpSpec, draw_sample, true_tau


@dataclass(frozen=True)
class EstimatorOptions:
    """Request fields shared by every method in a run."""

    hb_restricted: bool = False
    lambda_rule: LambdaRule = LambdaRule.PLUGIN
    settings: EstimationSettings = field(default_factory=EstimationSettings)


@dataclass(frozen=True)
class ReplicationOutcome:
    """One method on one replication; ``error`` is set when the estimator raised."""

    replication: int
    label: str
    tau_hat: float = math.nan
    tau_bc: float = math.nan
    se_robust: float = math.nan
    covered: bool = False
    length: float = math.nan
    h: float = math.nan
    b: float = math.nan
    selected: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class MethodSummary:
    """Aggregates for one method over the successful replications."""

    label: str
    bias: float
    rmse: float
    coverage: float
    coverage_se: float
    mean_length: float
    h_mean: float
    h_sd: float
    selected_mean: float
    selected_min: int
    selected_max: int
    successes: int
    failures: int


@dataclass(frozen=True)
class McSummary:
    """All method summaries of one run with the raw outcomes, ordered by replication."""

    spec: DgpSpec
    reps: int
    level: float
    true_tau: float
    records: Tuple[MethodSummary, ...]
    outcomes: Tuple[ReplicationOutcome, ...]

    def record(self, label: str) -> MethodSummary:
        for record in self.records:
            if record.label == label:
                return record
        raise KeyError(label)


def run_replication(
    spec: DgpSpec,
    replication: int,
    methods: Sequence[MethodSpec],
    level: float,
    options: EstimatorOptions,
    tau: float,
) -> List[ReplicationOutcome]:
    """Draw one sample and run every method on it."""
    sample = draw_sample(spec, replication)
    outcomes: List[ReplicationOutcome] = []
    for method in methods:
        try:
            result = estimate(
                RddRequest(
                    sample=sample,
                    method=method.method,
                    bandwidth_mode=method.bandwidth_mode,
                    confidence_level=level,
                    hb_restricted=options.hb_restricted,
                    lambda_rule=options.lambda_rule,
                    settings=options.settings,
                )
            )
        except RdLassoError as e:
            outcomes.append(
                ReplicationOutcome(replication, method.label, error=f"{type(e).__name__}: {e}")
            )
            continue
        outcomes.append(
            ReplicationOutcome(
                replication=replication,
                label=method.label,
                tau_hat=result.tau_hat,
                tau_bc=result.tau_bc,
                se_robust=result.se_robust,
                covered=result.ci[0] <= tau <= result.ci[1],
                length=result.ci_length,
                h=result.bandwidths.h,
                b=result.bandwidths.b,
                selected=len(result.selected),
            )
        )
    return outcomes


def summarize_method(label: str, outcomes: Iterable[ReplicationOutcome], tau: float) -> MethodSummary:
    """Bias, RMSE, coverage, length, bandwidth and selection statistics."""
    rows = [o for o in outcomes if o.label == label]
    good = [o for o in rows if o.ok]
    failures = len(rows) - len(good)
    if not good:
        nan = math.nan
        return MethodSummary(label, nan, nan, nan, nan, nan, nan, nan, nan, 0, 0, 0, failures)

    errors = np.array([o.tau_hat for o in good]) - tau
    covered = np.array([o.covered for o in good], dtype=np.float64)
    h = np.array([o.h for o in good])
    selected = np.array([o.selected for o in good])
    coverage = float(covered.mean())
    return MethodSummary(
        label=label,
        bias=float(errors.mean()),
        rmse=float(np.sqrt(np.mean(errors**2))),
        coverage=coverage,
        coverage_se=math.sqrt(coverage * (1.0 - coverage) / len(good)),
        mean_length=float(np.mean([o.length for o in good])),
        h_mean=float(h.mean()),
        h_sd=float(h.std(ddof=1)) if len(good) > 1 else 0.0,
        selected_mean=float(selected.mean()),
        selected_min=int(selected.min()),
        selected_max=int(selected.max()),
        successes=len(good),
        failures=failures,
    )


def run_monte_carlo(
    spec: DgpSpec,
    reps: int,
    methods: Optional[Sequence[MethodSpec]] = None,
    level: float = 0.95,
    *,
    threads: int = 1,
    options: Optional[EstimatorOptions] = None,
    show_progress: bool = False,
    structured_logger: Optional[StructuredLogger] = None,
) -> McSummary:
    """Run ``reps`` replications of every method and aggregate them.

    Replications run in joblib workers with one random stream each. Outcomes
    are ordered by replication before aggregation, so the summary does not
    depend on ``threads``. Failed replications are excluded and counted.

    Raises:
        ConfigError: ``reps < 1`` or an invalid level.
    """
    if reps < 1:
        raise ConfigError("At least one replication is required")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"Confidence level must lie in (0, 1), got {level}")
    grid = tuple(methods) if methods is not None else standard_method_grid()
    options = options or EstimatorOptions()
    tau = true_tau(spec)

    logger.info(
        f"Monte Carlo: {spec.dgp.value} n={spec.n} p={spec.p}, {reps} replications, {threads} workers"
    )
    tasks = (
        delayed(run_replication)(spec, r, grid, level, options, tau) for r in range(reps)
    )
    collected: List[ReplicationOutcome] = []
    with Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        disable=not show_progress,
    ) as progress:
        task_id = progress.add_task(f"{spec.dgp.value} p={spec.p}", total=reps)
        for batch in Parallel(n_jobs=threads, return_as="generator_unordered")(tasks):
            collected.extend(batch)
            progress.advance(task_id)

    order: Dict[str, int] = {m.label: i for i, m in enumerate(grid)}
    collected.sort(key=lambda o: (o.replication, order[o.label]))

    for outcome in collected:
        if outcome.ok:
            continue
        if structured_logger is not None:
            structured_logger.log_replication_failure(
                outcome.replication, outcome.label, outcome.error or ""
            )
        else:
            logger.warning(f"Replication {outcome.replication} failed for {outcome.label}: {outcome.error}")

    records = tuple(summarize_method(m.label, collected, tau) for m in grid)
    return McSummary(
        spec=spec,
        reps=reps,
        level=level,
        true_tau=tau,
        records=records,
        outcomes=tuple(collected),
    )


def studentized_statistics(summary: McSummary, label: str) -> NDArray[np.float64]:
    """(tau_bc - tau) / se_robust for each successful replication of ``label``."""
    rows = [o for o in summary.outcomes if o.label == label and o.ok and o.se_robust > 0]
    return np.array([(o.tau_bc - summary.true_tau) / o.se_robust for o in rows])


def normality_test(summary: McSummary, label: str) -> Tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value of the studentized statistics against N(0, 1)."""
    values = studentized_statistics(summary, label)
    if values.size == 0:
        raise ConfigError(f"No successful replications for {label}")
    result = stats.kstest(values, "norm")
    return float(result.statistic), float(result.pvalue)
