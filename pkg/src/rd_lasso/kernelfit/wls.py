"""Kernel-weighted least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from ..errors import SingularDesignError
from .design import Design

RCOND_THRESHOLD: float = 1e-12


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Weighted least squares solution with its normalized inverse Gram matrix."""

    coef: NDArray[np.float64]
    gram_inverse: NDArray[np.float64]
    residuals: NDArray[np.float64]
    rcond: float


def solve_weighted(
    regressors: NDArray[np.float64],
    weights: NDArray[np.float64],
    response: NDArray[np.float64],
    normalizer: float,
) -> OlsFit:
    """Solve the weighted normal equations for ``argmin sum w (y - X b)^2``.

    Raises:
        SingularDesignError: If the reciprocal condition number of the
            normalized Gram matrix is below ``RCOND_THRESHOLD``.
    """
    weighted = regressors * weights[:, None]
    gram = weighted.T @ regressors / normalizer
    if gram.size == 0:
        raise SingularDesignError("Design has no columns")

    cond = float(np.linalg.cond(gram))
    rcond = 0.0 if not np.isfinite(cond) or cond == 0.0 else 1.0 / cond
    if rcond < RCOND_THRESHOLD:
        raise SingularDesignError(
            f"Weighted Gram matrix is singular (rcond={rcond:.3g}, {regressors.shape[0]} rows, "
            f"{regressors.shape[1]} columns)"
        )

    rhs = weighted.T @ response / normalizer
    gram_inverse = linalg.inv(gram)
    coef = linalg.solve(gram, rhs, assume_a="sym")
    return OlsFit(
        coef=np.asarray(coef),
        gram_inverse=np.asarray(gram_inverse),
        residuals=np.asarray(response - regressors @ coef),
        rcond=rcond,
    )


def weighted_ols(design: Design) -> OlsFit:
    """Weighted OLS of the design response on every design column.

    Returns:
        Coefficients and ``((1/(nh)) sum K G G')^{-1}``.
    """
    return solve_weighted(design.g, design.weights, design.response, design.normalizer)


def hat_operator(regressors: NDArray[np.float64], weights: NDArray[np.float64]) -> NDArray[np.float64]:
    """Rows of ``(X'WX)^{-1} X'W``: each coefficient as a linear map of the response.

    Raises:
        SingularDesignError: Under the same reciprocal-condition rule as ``solve_weighted``.
    """
    m = regressors.shape[0]
    weighted = regressors * weights[:, None]
    gram = weighted.T @ regressors / m
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or 1.0 / cond < RCOND_THRESHOLD:
        raise SingularDesignError(
            f"Local polynomial Gram matrix is singular ({m} rows, {regressors.shape[1]} columns)"
        )
    return np.asarray(linalg.solve(gram, weighted.T / m, assume_a="sym"))
