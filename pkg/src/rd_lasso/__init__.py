"""Regression discontinuity estimation with many covariates via local Lasso selection."""

from loguru import logger

__version__ = "0.1.0"

# Library records stay silent until setup_logging() enables them.
logger.disable(__name__)
