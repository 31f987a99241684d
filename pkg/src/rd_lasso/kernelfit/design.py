"""Samples and kernel-localized regression designs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from loguru import logger
from scipy import linalg

from ..errors import ConfigError, DataError, EmptySideError
from .kernels import KernelFamily, KernelSpec, kernel_weights


def _frozen_array(values: ArrayLike, name: str, ndim: int) -> NDArray[np.float64]:
    array: NDArray[np.float64] = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise DataError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DataError(f"{name} contains missing or non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Sample:
    """Raw RD dataset: running variable, outcome, covariates and optional take-up."""

    x: NDArray[np.float64]
    y: NDArray[np.float64]
    z: Optional[NDArray[np.float64]] = None
    cutoff: float = 0.0
    w: Optional[NDArray[np.float64]] = None
    covariate_names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Validate shapes and freeze arrays."""
        x = _frozen_array(self.x, "x", 1)
        n: int = x.shape[0]
        if n < 1:
            raise DataError("Sample must contain at least one observation")

        y = _frozen_array(self.y, "y", 1)
        if y.shape[0] != n:
            raise DataError(f"y has length {y.shape[0]}, expected {n}")

        z_raw = np.empty((n, 0)) if self.z is None else np.asarray(self.z, dtype=np.float64)
        if z_raw.ndim == 1:
            z_raw = z_raw.reshape(n, -1) if z_raw.size else np.empty((n, 0))
        z = _frozen_array(z_raw, "z", 2)
        if z.shape[0] != n:
            raise DataError(f"z has {z.shape[0]} rows, expected {n}")

        w: Optional[NDArray[np.float64]] = None
        if self.w is not None:
            w = _frozen_array(self.w, "w", 1)
            if w.shape[0] != n:
                raise DataError(f"w has length {w.shape[0]}, expected {n}")
            if not np.all((w == 0.0) | (w == 1.0)):
                raise DataError("Take-up indicator w must take values in {0, 1}")

        names: Tuple[str, ...] = tuple(self.covariate_names)
        if not names:
            names = tuple(f"z{j + 1}" for j in range(z.shape[1]))
        if len(names) != z.shape[1]:
            raise DataError(f"{len(names)} covariate names for {z.shape[1]} covariates")

        if not np.isfinite(self.cutoff):
            raise DataError("Cutoff must be finite")

        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "cutoff", float(self.cutoff))
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def p(self) -> int:
        assert self.z is not None
        return int(self.z.shape[1])

    @property
    def centered(self) -> NDArray[np.float64]:
        """Running variable relative to the cutoff."""
        return self.x - self.cutoff

    @property
    def treated(self) -> NDArray[np.bool_]:
        """Sharp assignment T = 1{X >= cutoff}."""
        return self.x >= self.cutoff

    @property
    def covariates(self) -> NDArray[np.float64]:
        assert self.z is not None
        return self.z

    def with_outcome(self, y: ArrayLike) -> Sample:
        """Same running variable and covariates with another response."""
        return Sample(self.x, np.asarray(y), self.z, self.cutoff, self.w, self.covariate_names)

    def head(self, rows: int) -> Sample:
        """First ``rows`` observations."""
        if rows < 1:
            raise ConfigError("Subsample size must be at least 1")
        cut = slice(0, min(rows, self.n))
        w = None if self.w is None else self.w[cut]
        return Sample(self.x[cut], self.y[cut], self.covariates[cut], self.cutoff, w, self.covariate_names)

    def effective_counts(self, h: float) -> Tuple[int, int]:
        """Counts in [cutoff - h, cutoff) and [cutoff, cutoff + h]."""
        xc = self.centered
        n_minus = int(np.count_nonzero((xc >= -h) & (xc < 0.0)))
        n_plus = int(np.count_nonzero((xc >= 0.0) & (xc <= h)))
        return n_minus, n_plus


class DesignLayout(str, Enum):
    """Regressor layout: a level jump (sharp/fuzzy) or a slope kink."""

    JUMP = "jump"
    KINK = "kink"


_BASE_LABELS = {
    DesignLayout.JUMP: ("const", "T", "X", "T*X"),
    DesignLayout.KINK: ("const", "T*X", "X", "T*X^2", "X^2"),
}


@dataclass(frozen=True, eq=False)
class Design:
    """Kernel-weighted regression design restricted to positive-weight rows.

    ``normalizer`` is the ``n*h`` scaling of the weighted Gram matrix and objective.
    """

    g: NDArray[np.float64]
    weights: NDArray[np.float64]
    response: NDArray[np.float64]
    column_labels: Tuple[str, ...] = ()
    covariate_index: Tuple[int, ...] = ()
    base_columns: int = 4
    normalizer: float = 0.0
    bandwidth: float = 1.0
    rows: Optional[NDArray[np.int64]] = None
    side: Optional[NDArray[np.bool_]] = None
    layout: DesignLayout = DesignLayout.JUMP
    n_total: int = field(default=0)

    def __post_init__(self) -> None:
        """Validate dimensions and fill defaults."""
        g = np.asarray(self.g, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        response = np.asarray(self.response, dtype=np.float64)
        if g.ndim != 2:
            raise ConfigError("Design matrix must be two-dimensional")
        n_loc, k = g.shape
        if weights.shape != (n_loc,) or response.shape != (n_loc,):
            raise ConfigError("Weights and response must match the design rows")
        if n_loc == 0:
            raise EmptySideError("Design has no rows with positive kernel weight")
        if np.any(weights <= 0):
            raise ConfigError("Design weights must be strictly positive")
        if not 0 <= self.base_columns <= k:
            raise ConfigError(f"base_columns={self.base_columns} outside 0..{k}")

        labels = tuple(self.column_labels) or tuple(f"g{j}" for j in range(k))
        if len(labels) != k:
            raise ConfigError("One label per design column is required")
        covariate_index = tuple(self.covariate_index) or tuple(range(k - self.base_columns))
        if len(covariate_index) != k - self.base_columns:
            raise ConfigError("covariate_index must cover every non-base column")

        rows = np.arange(n_loc) if self.rows is None else np.asarray(self.rows, dtype=np.int64)
        side = np.zeros(n_loc, dtype=bool) if self.side is None else np.asarray(self.side, dtype=bool)
        n_total = self.n_total or n_loc
        normalizer = self.normalizer or n_total * self.bandwidth

        for name, value in (
            ("g", g), ("weights", weights), ("response", response), ("rows", rows), ("side", side)
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "column_labels", labels)
        object.__setattr__(self, "covariate_index", covariate_index)
        object.__setattr__(self, "n_total", int(n_total))
        object.__setattr__(self, "normalizer", float(normalizer))

    @property
    def n_loc(self) -> int:
        return int(self.g.shape[0])

    @property
    def n_columns(self) -> int:
        return int(self.g.shape[1])

    @property
    def base_index(self) -> Tuple[int, ...]:
        return tuple(range(self.base_columns))

    @property
    def covariate_columns(self) -> Tuple[int, ...]:
        return tuple(range(self.base_columns, self.n_columns))

    def gram(self) -> NDArray[np.float64]:
        """(1/(nh)) * sum K_i G_i G_i'."""
        weighted = self.g * self.weights[:, None]
        return np.asarray(weighted.T @ self.g / self.normalizer)

    def with_response(self, response: ArrayLike) -> Design:
        """Same window and columns with another response, one value per local row."""
        values = np.asarray(response, dtype=np.float64)
        return _rebuild(self, response=values)

    def restrict(self, columns: Sequence[int]) -> Design:
        """Keep ``columns`` (which must include every base column), in ascending order."""
        keep: Tuple[int, ...] = tuple(sorted(set(int(c) for c in columns)))
        missing = [c for c in self.base_index if c not in keep]
        if missing:
            raise ConfigError(f"Column restriction must keep base columns, missing {missing}")
        if any(c < 0 or c >= self.n_columns for c in keep):
            raise ConfigError("Column index out of range")
        covariate_index = tuple(
            self.covariate_index[c - self.base_columns] for c in keep if c >= self.base_columns
        )
        return _rebuild(
            self,
            g=self.g[:, keep],
            column_labels=tuple(self.column_labels[c] for c in keep),
            covariate_index=covariate_index,
        )

    def subset_rows(self, rows: ArrayLike) -> Design:
        """Row subset whose normalizer shrinks with the retained share of rows."""
        idx = np.asarray(rows)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        fraction: float = idx.shape[0] / self.n_loc
        return _rebuild(
            self,
            g=self.g[idx],
            weights=self.weights[idx],
            response=self.response[idx],
            rows=np.asarray(self.rows)[idx],
            side=np.asarray(self.side)[idx],
            normalizer=self.normalizer * fraction,
        )


def _rebuild(design: Design, **changes: object) -> Design:
    values = {
        "g": design.g,
        "weights": design.weights,
        "response": design.response,
        "column_labels": design.column_labels,
        "covariate_index": design.covariate_index,
        "base_columns": design.base_columns,
        "normalizer": design.normalizer,
        "bandwidth": design.bandwidth,
        "rows": design.rows,
        "side": design.side,
        "layout": design.layout,
        "n_total": design.n_total,
    }
    values.update(changes)
    return Design(**values)  # type: ignore[arg-type]


def build_design(
    sample: Sample,
    h: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    covariate_subset: Sequence[int] = (),
    *,
    outcome: Optional[ArrayLike] = None,
    layout: DesignLayout = DesignLayout.JUMP,
) -> Design:
    """Assemble the kernel-weighted design at bandwidth ``h``.

    Args:
        sample: Observations; the running variable is centered at ``sample.cutoff``.
        h: Bandwidth.
        kernel: Kernel family (a KernelSpec's own bandwidth is ignored in favour of ``h``).
        covariate_subset: Zero-based covariate indices appended after the base block.
        outcome: Alternative response (defaults to ``sample.y``).
        layout: ``JUMP`` gives (1, T, X, T*X); ``KINK`` gives (1, T*X, X, T*X^2, X^2).

    Returns:
        Design over observations with positive kernel weight.

    Raises:
        EmptySideError: If either side of the cutoff keeps no observation.
    """
    spec = kernel.with_bandwidth(h) if isinstance(kernel, KernelSpec) else KernelSpec(kernel, h)
    subset: Tuple[int, ...] = tuple(int(j) for j in covariate_subset)
    if any(j < 0 or j >= sample.p for j in subset):
        raise ConfigError(f"Covariate subset {subset} outside 0..{sample.p - 1}")
    if len(set(subset)) != len(subset):
        raise ConfigError("Covariate subset contains duplicates")

    xc = sample.centered
    k_all = kernel_weights(spec, xc / spec.bandwidth)
    keep = np.flatnonzero(k_all > 0.0)
    x_loc = xc[keep]
    t_loc = x_loc >= 0.0

    n_plus = int(np.count_nonzero(t_loc))
    if n_plus == 0 or n_plus == keep.shape[0]:
        raise EmptySideError(
            f"No observations {'above' if n_plus == 0 else 'below'} the cutoff within h={h:.6g}"
        )

    t = t_loc.astype(np.float64)
    if layout is DesignLayout.JUMP:
        base = [np.ones_like(x_loc), t, x_loc, t * x_loc]
    else:
        base = [np.ones_like(x_loc), t * x_loc, x_loc, t * x_loc**2, x_loc**2]
    g = np.column_stack(base + [sample.covariates[keep, j] for j in subset])

    response = sample.y if outcome is None else np.asarray(outcome, dtype=np.float64)
    return Design(
        g=g,
        weights=k_all[keep],
        response=response[keep],
        column_labels=_BASE_LABELS[layout] + tuple(sample.covariate_names[j] for j in subset),
        covariate_index=subset,
        base_columns=len(base),
        normalizer=sample.n * spec.bandwidth,
        bandwidth=spec.bandwidth,
        rows=keep,
        side=t_loc,
        layout=layout,
        n_total=sample.n,
    )


def drop_collinear_covariates(design: Design, tolerance: float = 1e-7) -> Tuple[Design, Tuple[int, ...]]:
    """Drop covariate columns that are linearly dependent inside the kernel window.

    Covariates are residualized on the base block and ranked by pivoted QR.

    Returns:
        The reduced design and the dropped original covariate indices.
    """
    if design.n_columns == design.base_columns:
        return design, ()

    root_w = np.sqrt(design.weights)[:, None]
    base = design.g[:, : design.base_columns] * root_w
    covs = design.g[:, design.base_columns :] * root_w
    coef, *_ = linalg.lstsq(base, covs)
    resid = covs - base @ coef

    _, r, pivots = linalg.qr(resid, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    reference = float(np.linalg.norm(covs, axis=0).max())
    rank = int(np.count_nonzero(diag > tolerance * reference)) if reference > 0 else 0
    kept = sorted(int(j) for j in pivots[:rank])
    kept_set = set(kept)
    dropped = tuple(
        design.covariate_index[j]
        for j in range(design.n_columns - design.base_columns)
        if j not in kept_set
    )
    if dropped:
        logger.warning(
            f"Dropped {len(dropped)} collinear covariates within bandwidth {design.bandwidth:.4g}"
        )
    columns = list(design.base_index) + [design.base_columns + j for j in kept]
    return design.restrict(columns), dropped
