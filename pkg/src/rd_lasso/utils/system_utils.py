"""Host resource helpers."""

from __future__ import annotations

from typing import Optional, Union

import psutil
from loguru import logger

from ..errors import ConfigError


def physical_cores() -> int:
    """Physical core count, falling back to logical cores and then to 1."""
    cores: Optional[int] = psutil.cpu_count(logical=False) or psutil.cpu_count(logical=True)
    return max(1, int(cores or 1))


def resolve_thread_count(threads: Union[int, str, None]) -> int:
    """Worker count for ``--threads``: a positive integer or ``auto``.

    Raises:
        ConfigError: Anything else.
    """
    if threads is None or (isinstance(threads, str) and threads.strip().lower() == "auto"):
        count = physical_cores()
        logger.debug(f"Using {count} workers (physical cores)")
        return count
    try:
        count = int(threads)
    except ValueError as e:
        raise ConfigError(f"--threads must be a positive integer or 'auto', got {threads!r}") from e
    if count < 1:
        raise ConfigError(f"--threads must be at least 1, got {count}")
    return count
