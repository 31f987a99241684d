"""Validation utilities for command-line values."""

from __future__ import annotations

import math
import re
from typing import List, Sequence

_COLUMN_SPLIT = re.compile(r"\s*,\s*")


def is_positive_finite(value: float) -> bool:
    return math.isfinite(value) and value > 0


def split_column_list(text: str) -> List[str]:
    """Split a comma-separated column list, dropping empty entries."""
    return [part for part in _COLUMN_SPLIT.split(text.strip()) if part]


def duplicated(names: Sequence[str]) -> List[str]:
    """Names that occur more than once, in first-seen order."""
    seen: set[str] = set()
    repeated: List[str] = []
    for name in names:
        if name in seen and name not in repeated:
            repeated.append(name)
        seen.add(name)
    return repeated
