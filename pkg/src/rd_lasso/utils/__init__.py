"""Utility functions for files, validation and host resources."""

from .file_utils import ensure_directory, write_output
from .system_utils import physical_cores, resolve_thread_count
from .validation_utils import duplicated, is_positive_finite, split_column_list

__all__ = [
    "ensure_directory",
    "write_output",
    "physical_cores",
    "resolve_thread_count",
    "duplicated",
    "is_positive_finite",
    "split_column_list",
]
