"""Compactly supported second-order kernels."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ConfigError


class KernelFamily(str, Enum):
    """Supported kernel shapes."""

    UNIFORM = "uniform"
    TRIANGULAR = "triangular"
    EPANECHNIKOV = "epanechnikov"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family paired with a bandwidth in running-variable units."""

    family: KernelFamily = KernelFamily.TRIANGULAR
    bandwidth: float = 1.0

    def __post_init__(self) -> None:
        """Validate kernel specification."""
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not math.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise ConfigError(f"Bandwidth must be positive and finite, got {self.bandwidth}")

    def with_bandwidth(self, bandwidth: float) -> KernelSpec:
        """Return the same family at another bandwidth."""
        return replace(self, bandwidth=bandwidth)


@dataclass(frozen=True)
class KernelConstants:
    """Moments of a kernel over its support [-1, 1]."""

    integral: float
    second_moment: float
    roughness: float


_CONSTANTS = {
    KernelFamily.UNIFORM: KernelConstants(1.0, 1.0 / 3.0, 0.5),
    KernelFamily.TRIANGULAR: KernelConstants(1.0, 1.0 / 6.0, 2.0 / 3.0),
    KernelFamily.EPANECHNIKOV: KernelConstants(1.0, 0.2, 0.6),
}


def kernel_weights(spec: Union[KernelSpec, KernelFamily], u: ArrayLike) -> NDArray[np.float64]:
    """Evaluate the kernel elementwise at scaled distances ``u``.

    Args:
        spec: Kernel specification or bare family. The bandwidth is not applied here.
        u: Distances already divided by the bandwidth.

    Returns:
        Kernel values, zero outside ``|u| <= 1``.
    """
    family: KernelFamily = spec.family if isinstance(spec, KernelSpec) else KernelFamily(spec)
    values: NDArray[np.float64] = np.asarray(u, dtype=np.float64)
    a: NDArray[np.float64] = np.abs(values)
    inside: NDArray[np.bool_] = a <= 1.0

    if family is KernelFamily.UNIFORM:
        out = np.where(inside, 0.5, 0.0)
    elif family is KernelFamily.TRIANGULAR:
        out = np.where(inside, 1.0 - a, 0.0)
    else:
        out = np.where(inside, 0.75 * (1.0 - values * values), 0.0)
    return np.asarray(out, dtype=np.float64)


def kernel_weight(spec: Union[KernelSpec, KernelFamily], u: float) -> float:
    """Evaluate the kernel at a single scaled distance."""
    return float(kernel_weights(spec, u))


def kernel_constants(family: Union[KernelFamily, str]) -> KernelConstants:
    """Closed-form moments for ``family``."""
    return _CONSTANTS[KernelFamily(family)]
