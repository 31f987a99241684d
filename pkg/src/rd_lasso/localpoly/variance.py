"""Nearest-neighbor and plug-in deviations for conditional (co)variances."""

from __future__ import annotations

from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ConfigError, EstimationError, InsufficientDataError
from ..kernelfit.design import Sample
from ..kernelfit.kernels import KernelFamily, KernelSpec
from .fits import Side, local_poly_operator, side_mask

PSD_TOLERANCE: float = 1e-10


def _nearest_within_side(xs: NDArray[np.float64], j: int) -> NDArray[np.int64]:
    """Indices of the ``j`` nearest other points; distance ties go to the lower index."""
    m = xs.shape[0]
    local_index = np.arange(m)
    order = np.lexsort((local_index, xs))
    position = np.empty(m, dtype=np.int64)
    position[order] = local_index

    offsets = np.concatenate([np.arange(-j, 0), np.arange(1, j + 1)])
    candidate_pos = position[:, None] + offsets[None, :]
    valid = (candidate_pos >= 0) & (candidate_pos < m)
    candidates = order[np.clip(candidate_pos, 0, m - 1)]
    distance = np.where(valid, np.abs(xs[candidates] - xs[:, None]), np.inf)
    tie_key = np.where(valid, candidates, m)

    ranked = np.lexsort((tie_key, distance), axis=-1)
    chosen = np.take_along_axis(candidates, ranked[:, :j], axis=1)

    # Ties at the j-th distance may extend past the sorted window.
    jth = np.take_along_axis(distance, ranked[:, j - 1 : j], axis=1)[:, 0]
    ambiguous = np.flatnonzero((distance[:, 0] == jth) | (distance[:, -1] == jth))
    for i in ambiguous:
        gap = np.abs(xs - xs[i])
        gap[i] = np.inf
        chosen[i] = np.lexsort((local_index, gap))[:j]
    return chosen


def nn_deviations(x: ArrayLike, values: ArrayLike, j_neighbors: int = 3) -> NDArray[np.float64]:
    """sqrt(J/(J+1)) * (V_i - mean of V over the J nearest same-side neighbors of X_i).

    Args:
        x: Running variable centered at the cutoff.
        values: ``(n,)`` or ``(n, m)`` array of responses.
        j_neighbors: Number of neighbors J.

    Returns:
        Deviations with the shape of ``values``. Products of coordinates estimate
        conditional covariances.

    Raises:
        InsufficientDataError: A side has fewer than J + 1 observations.
    """
    if j_neighbors < 1:
        raise ConfigError("Nearest-neighbor count must be at least 1")
    xs = np.asarray(x, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    flat = v.ndim == 1
    v2 = v[:, None] if flat else v

    out = np.zeros_like(v2)
    factor = np.sqrt(j_neighbors / (j_neighbors + 1.0))
    for side in Side:
        idx = np.flatnonzero(side_mask(xs, side))
        if idx.shape[0] < j_neighbors + 1:
            raise InsufficientDataError(
                f"{idx.shape[0]} observations on the {side.value} side; "
                f"nearest-neighbor variance needs {j_neighbors + 1}"
            )
        neighbors = _nearest_within_side(xs[idx], j_neighbors)
        local = v2[idx]
        out[idx] = factor * (local - local[neighbors].mean(axis=1))
    return out[:, 0] if flat else out


def nn_variance(sample: Sample, j_neighbors: int = 3) -> NDArray[np.float64]:
    """Per-observation outcome variance estimates from same-side nearest neighbors."""
    return nn_deviations(sample.centered, sample.y, j_neighbors) ** 2


def plugin_deviations(
    x: ArrayLike,
    values: ArrayLike,
    bandwidth: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
) -> NDArray[np.float64]:
    """Residuals of each column from its one-sided local linear fit at ``bandwidth``."""
    xs = np.asarray(x, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    flat = v.ndim == 1
    v2 = v[:, None] if flat else v

    out = np.zeros_like(v2)
    for side in Side:
        mask = side_mask(xs, side)
        coef = local_poly_operator(xs, side, 1, bandwidth, kernel) @ v2
        fitted = coef[0][None, :] + xs[mask][:, None] * coef[1][None, :]
        out[mask] = v2[mask] - fitted
    return out[:, 0] if flat else out


def project_psd(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    """Clip tiny negative eigenvalues of a symmetric matrix.

    Raises:
        EstimationError: An eigenvalue below ``-PSD_TOLERANCE`` (relative to scale).
    """
    sym = 0.5 * (matrix + matrix.T)
    eigenvalues, vectors = np.linalg.eigh(sym)
    scale = max(1.0, float(np.max(np.abs(eigenvalues), initial=0.0)))
    if eigenvalues.size and eigenvalues[0] < -PSD_TOLERANCE * scale:
        raise EstimationError(f"Covariance estimate is not positive semidefinite ({eigenvalues[0]:.3g})")
    if eigenvalues.size and eigenvalues[0] < 0:
        return np.asarray((vectors * np.clip(eigenvalues, 0.0, None)) @ vectors.T)
    return sym


def weighted_covariance(deviations: NDArray[np.float64], weights: NDArray[np.float64]) -> NDArray[np.float64]:
    """sum w_i d_i d_i' / sum w_i, projected to the PSD cone."""
    d = deviations[:, None] if deviations.ndim == 1 else deviations
    total = float(weights.sum())
    if total <= 0:
        return np.zeros((d.shape[1], d.shape[1]))
    return project_psd((d * weights[:, None]).T @ d / total)
