"""CSV ingestion into RD samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..errors import ConfigError, DataError, InputFileNotFoundError, MissingColumnError, ParseError
from ..kernelfit.design import Sample
from ..utils.validation_utils import duplicated

MISSING_TOKENS: FrozenSet[str] = frozenset({"", "NA", "NaN", "nan", "null", "NULL", "."})


@dataclass(frozen=True)
class ColumnMapping:
    """Which CSV columns hold the running variable, outcome, take-up and covariates.

    With ``all_others`` every column not mapped to another role is a covariate.
    """

    running: str
    outcome: str
    takeup: Optional[str] = None
    covariates: Tuple[str, ...] = ()
    all_others: bool = False

    def __post_init__(self) -> None:
        """Validate the mapping."""
        object.__setattr__(self, "covariates", tuple(self.covariates))
        if self.all_others and self.covariates:
            raise ConfigError("Give either explicit covariates or all-others, not both")
        roles = [self.running, self.outcome] + ([self.takeup] if self.takeup else []) + list(self.covariates)
        repeated = duplicated(roles)
        if repeated:
            raise ConfigError(f"Columns mapped more than once: {', '.join(repeated)}")

    @property
    def fixed_columns(self) -> Tuple[str, ...]:
        return (self.running, self.outcome) + ((self.takeup,) if self.takeup else ())

    def covariate_columns(self, header: Sequence[str]) -> Tuple[str, ...]:
        if self.all_others:
            return tuple(c for c in header if c not in self.fixed_columns)
        return self.covariates


@dataclass
class LoadReport:
    """Statistics from loading one CSV file."""

    total_rows: int = 0
    loaded_rows: int = 0
    dropped_rows: int = 0
    missing_by_column: Dict[str, int] = field(default_factory=lambda: {})

    @property
    def keep_rate(self) -> float:
        if self.total_rows == 0:
            return 0.0
        return self.loaded_rows / self.total_rows


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise InputFileNotFoundError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"{path} is empty", line=1) from e
    except pd.errors.ParserError as e:
        raise ParseError(f"Malformed CSV {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 encoded: {e}") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric(values: pd.Series, column: str, rows: np.ndarray) -> np.ndarray:
    """Parse cells as floats; ``rows`` are zero-based data-row indices for error lines."""
    parsed = pd.to_numeric(values, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(parsed)
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise ParseError(
            f"Non-numeric value {values.iloc[first]!r}",
            line=int(rows[first]) + 2,
            column=column,
        )
    return parsed


def load_csv_with_report(
    path: Union[str, Path],
    mapping: ColumnMapping,
    cutoff: float = 0.0,
) -> Tuple[Sample, LoadReport]:
    """Load a CSV with a header row into a Sample.

    Rows with a missing mapped field are dropped and counted; any other
    non-numeric or infinite cell is an error.

    Raises:
        InputFileNotFoundError: The file does not exist.
        MissingColumnError: A mapped column is not in the header.
        ParseError: A mapped cell is not a finite number.
        DataError: No complete rows remain.
    """
    path = Path(path)
    frame = _read_frame(path)
    header = list(frame.columns)
    covariates = mapping.covariate_columns(header)
    mapped: List[str] = list(mapping.fixed_columns) + list(covariates)
    for name in mapped:
        if name not in header:
            raise MissingColumnError(name)

    cells = frame[mapped].apply(lambda column: column.str.strip())
    missing = cells.isin(MISSING_TOKENS)
    report = LoadReport(total_rows=len(frame))
    report.missing_by_column = {name: int(count) for name, count in missing.sum().items() if count}

    complete = ~missing.any(axis=1).to_numpy()
    rows = np.flatnonzero(complete)
    report.loaded_rows = int(rows.size)
    report.dropped_rows = report.total_rows - report.loaded_rows
    if report.dropped_rows:
        logger.warning(
            f"Dropped {report.dropped_rows} of {report.total_rows} rows with missing values",
            missing_by_column=report.missing_by_column,
        )
    if rows.size == 0:
        raise DataError(f"No complete rows in {path}")

    kept = cells.iloc[rows]
    parsed = {name: _numeric(kept[name], name, rows) for name in mapped}
    z = np.column_stack([parsed[c] for c in covariates]) if covariates else None
    sample = Sample(
        x=parsed[mapping.running],
        y=parsed[mapping.outcome],
        z=z,
        cutoff=cutoff,
        w=parsed[mapping.takeup] if mapping.takeup else None,
        covariate_names=tuple(covariates),
    )
    logger.info(f"Loaded {sample.n} observations with {sample.p} covariates from {path}")
    return sample, report


def load_csv(path: Union[str, Path], mapping: ColumnMapping, cutoff: float = 0.0) -> Sample:
    """Load a CSV into a Sample; see ``load_csv_with_report``."""
    sample, _ = load_csv_with_report(path, mapping, cutoff)
    return sample
