"""Output file helpers."""

from __future__ import annotations

from pathlib import Path

from ..errors import OutputError


def ensure_directory(dir_path: Path) -> Path:
    """Create ``dir_path`` and its parents if missing.

    Raises:
        OutputError: The directory cannot be created.
    """
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {dir_path}: {e}") from e
    return dir_path


def write_output(file_path: Path, content: str, encoding: str = "utf-8") -> Path:
    """Write a report or table to ``file_path``, creating parent directories.

    Raises:
        OutputError: The file cannot be written.
    """
    ensure_directory(file_path.parent)
    try:
        file_path.write_text(content, encoding=encoding)
    except OSError as e:
        raise OutputError(f"Cannot write {file_path}: {e}") from e
    return file_path
