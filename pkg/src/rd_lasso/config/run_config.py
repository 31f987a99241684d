"""Run configuration assembled from command-line options."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
import re
from typing import Any, Optional, Type, TypeVar, Union

from ..errors import ConfigError
from ..ingest.csv_loader import ColumnMapping
from ..kernelfit.design import Sample
from ..kernelfit.kernels import KernelFamily
from ..lasso.penalty import LambdaRule, ThresholdRule
from ..localpoly.bias_variance import VarianceEstimator
from ..rdd.models import BandwidthMode, DesignKind, Method, RddRequest
from ..rdd.report import OutputFormat
from ..sim.dgp import Dgp, DgpSpec
from ..utils.system_utils import resolve_thread_count
from ..utils.validation_utils import is_positive_finite, split_column_list
from .settings import EstimationSettings

ALL_OTHERS: str = "all-others"

_E = TypeVar("_E", bound=Enum)
_FIXED_BANDWIDTH = re.compile(r"^h=(?P<h>[^,]+)(?:,b=(?P<b>[^,]+))?$")


class Command(str, Enum):
    ESTIMATE = "estimate"
    COMPARE = "compare"
    SIMULATE = "simulate"


@dataclass(frozen=True)
class BandwidthChoice:
    """Parsed ``--bandwidth`` value."""

    mode: BandwidthMode = BandwidthMode.ADAPTIVE
    h: Optional[float] = None
    b: Optional[float] = None


@dataclass(frozen=True)
class LambdaChoice:
    """Parsed ``--lambda`` value."""

    rule: LambdaRule = LambdaRule.PLUGIN
    value: Optional[float] = None


def _parse_enum(kind: Type[_E], value: Union[str, _E], flag: str) -> _E:
    if isinstance(value, kind):
        return value
    text = str(value).strip().lower().replace("-", "_")
    try:
        return kind(text)
    except ValueError as e:
        choices = ", ".join(member.value for member in kind)
        raise ConfigError(f"{flag} must be one of {choices}; got {value!r}") from e


def _parse_positive(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ConfigError(f"{what} must be a number, got {text!r}") from e
    if not is_positive_finite(value):
        raise ConfigError(f"{what} must be positive and finite, got {text!r}")
    return value


def parse_bandwidth_option(value: str) -> BandwidthChoice:
    """Parse ``auto-nocov``, ``auto-cov``, ``adaptive`` or ``h=<v>[,b=<v>]``.

    Raises:
        ConfigError: Unrecognized or nonpositive values.
    """
    text = value.strip().lower().replace(" ", "")
    keywords = {
        "auto-nocov": BandwidthMode.AUTO_WITHOUT_COVARIATES,
        "auto-cov": BandwidthMode.AUTO_WITH_COVARIATES,
        "adaptive": BandwidthMode.ADAPTIVE,
    }
    if text in keywords:
        return BandwidthChoice(keywords[text])
    match = _FIXED_BANDWIDTH.match(text)
    if match is None:
        raise ConfigError(
            f"--bandwidth must be auto-nocov, auto-cov, adaptive or h=<v>[,b=<v>]; got {value!r}"
        )
    h = _parse_positive(match.group("h"), "Bandwidth h")
    b = _parse_positive(match.group("b"), "Bandwidth b") if match.group("b") else None
    return BandwidthChoice(BandwidthMode.FIXED, h, b)


def parse_lambda_option(value: str) -> LambdaChoice:
    """Parse ``plugin``, ``cv`` or a nonnegative penalty level.

    Raises:
        ConfigError: Unrecognized or negative values.
    """
    text = value.strip().lower()
    if text == "plugin":
        return LambdaChoice(LambdaRule.PLUGIN)
    if text in ("cv", "cross-validation", "cross_validation"):
        return LambdaChoice(LambdaRule.CROSS_VALIDATION)
    try:
        lam = float(text)
    except ValueError as e:
        raise ConfigError(f"--lambda must be plugin, cv or a number; got {value!r}") from e
    if not lam >= 0 or lam == float("inf"):
        raise ConfigError(f"--lambda must be nonnegative and finite, got {value!r}")
    return LambdaChoice(LambdaRule.FIXED, lam)


def parse_selection_option(value: str) -> ThresholdRule:
    text = value.strip().lower()
    if text == "threshold":
        return ThresholdRule.SCALED_THRESHOLD
    return _parse_enum(ThresholdRule, text, "--selection")


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs.

    ``estimate`` and ``compare`` read a CSV and need ``input_path``, ``cutoff``
    and ``mapping``; ``simulate`` needs ``dgp``, ``p``, ``n`` and ``reps``.
    """

    command: Command

    # Data
    input_path: Optional[Path] = None
    cutoff: Optional[float] = None
    mapping: Optional[ColumnMapping] = None
    first_n: Optional[int] = None

    # Estimator
    method: Method = Method.COVARIATE_SELECTION
    design_kind: DesignKind = DesignKind.SHARP
    kink_denominator: Optional[float] = None
    kernel: KernelFamily = KernelFamily.TRIANGULAR
    bandwidth: BandwidthChoice = field(default_factory=BandwidthChoice)
    level: float = 0.95
    hb_restricted: bool = False
    lambda_choice: LambdaChoice = field(default_factory=LambdaChoice)
    selection_rule: ThresholdRule = ThresholdRule.SUPPORT
    variance_estimator: VarianceEstimator = VarianceEstimator.NN
    settings: EstimationSettings = field(default_factory=EstimationSettings)

    # Output
    output_path: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.TEXT

    # Simulation
    dgp: Optional[Dgp] = None
    p: Optional[int] = None
    n: Optional[int] = None
    reps: Optional[int] = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        """Validate the configuration for its command."""
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"--level must lie in (0, 1), got {self.level}")
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if self.first_n is not None and self.first_n < 1:
            raise ConfigError("--first-n must be at least 1")

        if self.command is Command.SIMULATE:
            missing = [name for name in ("dgp", "p", "n", "reps") if getattr(self, name) is None]
            if missing:
                raise ConfigError(f"simulate requires {', '.join('--' + m for m in missing)}")
            assert self.reps is not None
            if self.reps < 1:
                raise ConfigError("--reps must be at least 1")
            if self.lambda_choice.rule is LambdaRule.FIXED:
                raise ConfigError("simulate supports --lambda plugin or cv only")
            self.dgp_spec()
        else:
            if self.input_path is None:
                raise ConfigError(f"{self.command.value} requires an input CSV")
            if self.cutoff is None:
                raise ConfigError(f"{self.command.value} requires --cutoff")
            if self.mapping is None:
                raise ConfigError(f"{self.command.value} requires --outcome and --running")
            if self.design_kind is DesignKind.FUZZY and self.mapping.takeup is None:
                raise ConfigError("--design fuzzy requires --takeup")

    def dgp_spec(self) -> DgpSpec:
        assert self.dgp is not None and self.n is not None and self.p is not None
        return DgpSpec(dgp=self.dgp, n=self.n, p=self.p, seed=self.seed)

    def to_request(self, sample: Sample) -> RddRequest:
        """Estimation request for ``sample`` with this run's options."""
        return RddRequest(
            sample=sample,
            method=self.method,
            design_kind=self.design_kind,
            kink_denominator=self.kink_denominator,
            kernel=self.kernel,
            bandwidth_mode=self.bandwidth.mode,
            fixed_h=self.bandwidth.h,
            fixed_b=self.bandwidth.b,
            confidence_level=self.level,
            hb_restricted=self.hb_restricted,
            lambda_rule=self.lambda_choice.rule,
            lambda_value=self.lambda_choice.value,
            selection_rule=self.selection_rule,
            variance_estimator=self.variance_estimator,
            settings=self.settings,
        )


def _mapping_from(
    outcome: Optional[str],
    running: Optional[str],
    takeup: Optional[str],
    covariates: Optional[str],
) -> Optional[ColumnMapping]:
    if outcome is None or running is None:
        return None
    text = (covariates or "").strip()
    if text.lower() == ALL_OTHERS:
        return ColumnMapping(running=running, outcome=outcome, takeup=takeup, all_others=True)
    return ColumnMapping(
        running=running,
        outcome=outcome,
        takeup=takeup,
        covariates=tuple(split_column_list(text)),
    )


def load_run_config(**options: Any) -> RunConfig:
    """Build a RunConfig from raw CLI option values.

    Compound flags arrive as strings and are parsed here; absent options
    keep their defaults.

    Raises:
        ConfigError: Any option is invalid or a required one is missing.
    """
    command = _parse_enum(Command, options["command"], "command")
    settings = EstimationSettings(
        nn_neighbors=int(options.get("nn_neighbors") or EstimationSettings.nn_neighbors),
    )
    input_path = options.get("input_path")
    output_path = options.get("output_path")
    dgp = options.get("dgp")
    return RunConfig(
        command=command,
        input_path=Path(input_path) if input_path is not None else None,
        cutoff=options.get("cutoff"),
        mapping=_mapping_from(
            options.get("outcome"),
            options.get("running"),
            options.get("takeup"),
            options.get("covariates"),
        ),
        first_n=options.get("first_n"),
        method=_parse_enum(Method, options.get("method") or Method.COVARIATE_SELECTION, "--method"),
        design_kind=_parse_enum(DesignKind, options.get("design") or DesignKind.SHARP, "--design"),
        kink_denominator=options.get("kink_denominator"),
        kernel=_parse_enum(KernelFamily, options.get("kernel") or KernelFamily.TRIANGULAR, "--kernel"),
        bandwidth=parse_bandwidth_option(options.get("bandwidth") or "adaptive"),
        level=float(options.get("level", 0.95)),
        hb_restricted=bool(options.get("hb_restricted", False)),
        lambda_choice=parse_lambda_option(options.get("lambda_option") or "plugin"),
        selection_rule=parse_selection_option(options.get("selection") or "support"),
        variance_estimator=_parse_enum(
            VarianceEstimator, options.get("variance") or VarianceEstimator.NN, "--variance"
        ),
        settings=settings,
        output_path=Path(output_path) if output_path is not None else None,
        output_format=_parse_enum(OutputFormat, options.get("output_format") or OutputFormat.TEXT, "--format"),
        dgp=_parse_enum(Dgp, dgp, "--dgp") if dgp is not None else None,
        p=options.get("p"),
        n=options.get("n"),
        reps=options.get("reps"),
        seed=int(options.get("seed") or 0),
        threads=resolve_thread_count(options.get("threads", 1)),
    )
