"""Configuration package for RD estimation runs.

``RunConfig`` lives in ``rd_lasso.config.run_config`` and is imported from there.
"""

from .logging_config import (
    LoggedOperation,
    LoggingConfig,
    StructuredLogger,
    get_logger,
    setup_logging,
)
from .settings import EstimationSettings

__all__ = [
    # Logging
    "LoggedOperation",
    "LoggingConfig",
    "StructuredLogger",
    "get_logger",
    "setup_logging",
    # Settings
    "EstimationSettings",
]
