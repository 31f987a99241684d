"""One-sided local polynomial fits at the cutoff."""

from __future__ import annotations

from enum import Enum
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ConfigError, InsufficientDataError
from ..kernelfit.kernels import KernelFamily, KernelSpec, kernel_weights
from ..kernelfit.wls import hat_operator


class Side(str, Enum):
    """Side of the cutoff; the cutoff itself belongs to the right side."""

    LEFT = "left"
    RIGHT = "right"


def side_mask(x: NDArray[np.float64], side: Union[Side, str]) -> NDArray[np.bool_]:
    return x < 0.0 if Side(side) is Side.LEFT else x >= 0.0


def local_poly_operator(
    x: ArrayLike,
    side: Union[Side, str],
    degree: int,
    bandwidth: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
) -> NDArray[np.float64]:
    """Linear weights mapping a response to the one-sided polynomial coefficients.

    ``x`` is centered at the cutoff. Row ``k`` of the result gives ``c_k``, the
    coefficient of ``x**k``; columns outside the side or the window are zero.
    The fit runs on ``u = x / bandwidth`` and is rescaled afterwards.

    Raises:
        InsufficientDataError: Fewer than ``degree + 1`` weighted observations.
        SingularDesignError: Ill-conditioned local Gram matrix.
    """
    if degree not in (1, 2, 3, 4):
        raise ConfigError(f"Local polynomial degree must be between 1 and 4, got {degree}")
    if not bandwidth > 0:
        raise ConfigError(f"Bandwidth must be positive, got {bandwidth}")

    xs = np.asarray(x, dtype=np.float64)
    u = xs / bandwidth
    weights = kernel_weights(kernel, u)
    idx = np.flatnonzero(side_mask(xs, side) & (weights > 0.0))
    if idx.shape[0] < degree + 1:
        raise InsufficientDataError(
            f"{idx.shape[0]} observations on the {Side(side).value} side within bandwidth "
            f"{bandwidth:.4g}; degree {degree} needs {degree + 1}"
        )

    basis = np.vander(u[idx], degree + 1, increasing=True)
    local = hat_operator(basis, weights[idx])
    local /= (bandwidth ** np.arange(degree + 1))[:, None]

    operator = np.zeros((degree + 1, xs.shape[0]))
    operator[:, idx] = local
    return operator


def local_poly_fit(
    x: ArrayLike,
    y: ArrayLike,
    side: Union[Side, str],
    degree: int,
    bandwidth: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
) -> NDArray[np.float64]:
    """Coefficients (c_0, ..., c_degree); the k-th derivative at 0 is k! * c_k."""
    operator = local_poly_operator(x, side, degree, bandwidth, kernel)
    return np.asarray(operator @ np.asarray(y, dtype=np.float64))
