"""loguru sinks and structured records for estimation and simulation runs.

Library modules log through ``from loguru import logger``; records stay
disabled until :func:`setup_logging` installs the sinks below.
"""

from __future__ import annotations

import itertools
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from types import TracebackType
from typing import Any, Dict, Iterator, Optional, Tuple, Type, Union

from loguru import logger

PACKAGE_NAME: str = "rd_lasso"

CONSOLE_FORMAT: str = "<level>{level: <8}</level> | <cyan>{name}</cyan> - <level>{message}</level>"
FILE_FORMAT: str = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} | {process.id} | "
    "{message} | {extra}"
)

_operation_counter: Iterator[int] = itertools.count(1)


def _check_level(name: str, what: str) -> None:
    try:
        logger.level(name.upper())
    except ValueError as e:
        raise ValueError(f"Invalid {what}: {name}") from e


@dataclass(frozen=True)
class LoggingConfig:
    """Where records go and how much of them.

    The console sink writes to stderr so that reports on stdout stay clean; the
    rotating file sink is only added when ``log_file`` is set.
    """

    log_file: Optional[Path] = None
    log_level: str = "DEBUG"
    rotation_size: str = "10 MB"
    retention_count: int = 5
    compression: str = "zip"

    console_enabled: bool = True
    console_level: str = "WARNING"

    # Durations above the threshold are repeated at WARNING
    enable_performance_logging: bool = True
    slow_operation_threshold_seconds: float = 30.0

    def __post_init__(self) -> None:
        _check_level(self.log_level, "log level")
        _check_level(self.console_level, "console log level")
        if self.retention_count < 1:
            raise ValueError("Retention count must be at least 1")
        if not self.slow_operation_threshold_seconds > 0:
            raise ValueError("Slow operation threshold must be positive")

    @classmethod
    def for_cli(cls, verbose: bool = False, log_file: Optional[Path] = None) -> LoggingConfig:
        """Console at WARNING (DEBUG with ``--verbose``) plus an optional file sink."""
        return cls(log_file=log_file, console_level="DEBUG" if verbose else "WARNING")


class StructuredLogger:
    """Installs the sinks and writes records with their context bound as extras."""

    def __init__(self, config: LoggingConfig) -> None:
        self.config: LoggingConfig = config
        self.sink_ids: Tuple[int, ...] = self._install_sinks()
        logger.enable(PACKAGE_NAME)

    def _install_sinks(self) -> Tuple[int, ...]:
        logger.remove()
        config = self.config
        sinks = []
        if config.console_enabled:
            sinks.append(
                logger.add(sys.stderr, level=config.console_level.upper(), format=CONSOLE_FORMAT, colorize=False)
            )
        if config.log_file is not None:
            config.log_file.parent.mkdir(parents=True, exist_ok=True)
            sinks.append(
                logger.add(
                    str(config.log_file),
                    level=config.log_level.upper(),
                    format=FILE_FORMAT,
                    rotation=config.rotation_size,
                    retention=config.retention_count,
                    compression=config.compression,
                    enqueue=True,
                )
            )
        return tuple(sinks)

    def log_operation_start(self, operation: str, **context: Any) -> str:
        """Record the start of ``operation`` and return its id (``<operation>_<time>_<n>``)."""
        operation_id = f"{operation}_{time.strftime('%Y%m%d_%H%M%S')}_{next(_operation_counter)}"
        logger.bind(operation_id=operation_id, operation=operation, **context).info(
            f"Operation started: {operation}"
        )
        return operation_id

    def log_operation_end(
        self,
        operation_id: str,
        operation: str,
        error: Optional[BaseException] = None,
        **context: Any,
    ) -> None:
        """Record success, or failure with the error's type and message."""
        bound = logger.bind(operation_id=operation_id, operation=operation, success=error is None, **context)
        if error is None:
            bound.success(f"Operation completed: {operation}")
            return
        bound.bind(error_type=type(error).__name__, error_message=str(error)).error(
            f"Operation failed: {operation}"
        )

    def log_performance_metric(
        self,
        metric_name: str,
        value: Union[int, float],
        unit: str = "",
        **context: Any,
    ) -> None:
        """Record a metric at DEBUG; ``*_duration_seconds`` above the threshold also warns."""
        logger.bind(metric_name=metric_name, metric_value=value, metric_unit=unit, **context).debug(
            f"{metric_name} = {value} {unit}".rstrip()
        )
        threshold = self.config.slow_operation_threshold_seconds
        if self.config.enable_performance_logging and metric_name.endswith("_duration_seconds") and value > threshold:
            logger.bind(
                metric_name=metric_name, duration_seconds=value, threshold_seconds=threshold, **context
            ).warning(f"Slow operation detected: {metric_name} took {value:.1f}s")

    def log_estimate(
        self,
        method: str,
        tau_hat: float,
        ci: Tuple[float, float],
        h: float,
        b: float,
        selected: int,
        **context: Any,
    ) -> None:
        """One RD estimate with its interval, bandwidths and selection size."""
        logger.bind(
            estimate_method=method,
            estimate_tau=tau_hat,
            estimate_ci_lower=ci[0],
            estimate_ci_upper=ci[1],
            estimate_h=h,
            estimate_b=b,
            estimate_selected=selected,
            **context,
        ).info(f"Estimate ({method}): tau={tau_hat:.4f} CI=[{ci[0]:.4f}, {ci[1]:.4f}] h={h:.4f}")

    def log_replication_failure(self, replication: int, method: str, error: str, **context: Any) -> None:
        """A Monte Carlo replication that raised instead of returning an estimate."""
        logger.bind(replication=replication, replication_method=method, error_message=error, **context).warning(
            f"Replication {replication} failed for {method}"
        )


_default_structured_logger: Optional[StructuredLogger] = None


def setup_logging(config: Optional[LoggingConfig] = None) -> StructuredLogger:
    """Replace every loguru sink with the ones ``config`` describes.

    Returns:
        The StructuredLogger, also kept as the default for :func:`get_logger`.
    """
    global _default_structured_logger
    config = config or LoggingConfig()
    _default_structured_logger = StructuredLogger(config)
    logger.bind(log_file=str(config.log_file) if config.log_file else None).debug(
        f"Logging initialized (console {config.console_level if config.console_enabled else 'off'})"
    )
    return _default_structured_logger


def get_logger() -> StructuredLogger:
    """The default StructuredLogger, set up with defaults on first use."""
    if _default_structured_logger is None:
        return setup_logging()
    return _default_structured_logger


class LoggedOperation:
    """Times a block and records its start, duration and outcome.

    Exceptions are recorded and re-raised.
    """

    def __init__(self, structured_logger: StructuredLogger, operation_name: str, **context: Any) -> None:
        self.structured_logger: StructuredLogger = structured_logger
        self.operation_name: str = operation_name
        self.context: Dict[str, Any] = context
        self.operation_id: Optional[str] = None
        self.duration_seconds: Optional[float] = None
        self._started: Optional[float] = None

    def __enter__(self) -> LoggedOperation:
        self._started = time.perf_counter()
        self.operation_id = self.structured_logger.log_operation_start(self.operation_name, **self.context)
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_val: Optional[BaseException],
        _: Optional[TracebackType],
    ) -> None:
        if self._started is None or self.operation_id is None:
            return
        self.duration_seconds = time.perf_counter() - self._started
        self.structured_logger.log_performance_metric(
            f"{self.operation_name}_duration_seconds",
            self.duration_seconds,
            "seconds",
            operation_id=self.operation_id,
        )
        self.structured_logger.log_operation_end(
            self.operation_id,
            self.operation_name,
            error=exc_val,
            duration_seconds=self.duration_seconds,
            **self.context,
        )
