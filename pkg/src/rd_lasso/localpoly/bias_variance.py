"""Pre-asymptotic bias and variance of covariate-adjusted local polynomial RD estimators.

All estimators here are linear in the combined response ``q' V_i`` with
``V_i = (Y_i, Z_sel,i')'`` and ``q = (1, -gamma')'``, so bias and variance are
read off exact per-observation weight vectors. The robust variance uses the
composite weights of the bias-corrected estimator.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ConfigError
from ..kernelfit.design import DesignLayout, Sample, build_design
from ..kernelfit.kernels import KernelFamily, KernelSpec
from ..kernelfit.wls import hat_operator
from .fits import Side, local_poly_operator, side_mask
from .variance import nn_deviations, plugin_deviations, weighted_covariance


class VarianceEstimator(str, Enum):
    """Source of the per-observation deviations."""

    NN = "nn"
    PLUGIN = "plugin"


@dataclass(frozen=True)
class BandwidthPair:
    """Main bandwidth ``h`` and pilot bandwidth ``b`` for the bias estimate."""

    h: float
    b: float
    restricted: bool = False

    def __post_init__(self) -> None:
        """Validate bandwidths."""
        for name, value in (("h", self.h), ("b", self.b)):
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"Bandwidth {name} must be positive and finite, got {value}")
        if self.restricted and self.h != self.b:
            raise ConfigError("Restricted bandwidth pair requires h == b")

    @classmethod
    def equal(cls, h: float) -> BandwidthPair:
        """The h/b = 1 pair."""
        return cls(h=h, b=h, restricted=True)


@dataclass(frozen=True, eq=False)
class BiasVariance:
    """Estimated leading bias and variance with their components.

    For jump estimators ``mu2_*`` hold one-sided second derivatives of
    ``(Y, Z_sel)``, ``variance`` is scaled by ``n*h``. For kink estimators
    (``bias_order == 3``) they hold third derivatives and the scale is ``n*h^3``.
    ``bias_spread`` is the summed per-side sampling variance of the bias terms.
    """

    bias: float
    variance: float
    variance_robust: float
    q_bar: NDArray[np.float64]
    mu2_minus: NDArray[np.float64]
    mu2_plus: NDArray[np.float64]
    sigma_minus: NDArray[np.float64]
    sigma_plus: NDArray[np.float64]
    normalizer: float
    bandwidths: BandwidthPair
    bias_order: int = 2
    bias_spread: float = 0.0

    @property
    def bias_correction(self) -> float:
        """h^2 * bias, the quantity subtracted from the point estimate."""
        return self.bandwidths.h**2 * self.bias

    @property
    def se_conventional(self) -> float:
        return math.sqrt(self.variance / self.normalizer)

    @property
    def se_robust(self) -> float:
        return math.sqrt(self.variance_robust / self.normalizer)


def response_block(sample: Sample, selected: Sequence[int]) -> NDArray[np.float64]:
    """Columns (Y, Z_sel)."""
    return np.column_stack([sample.y] + [sample.covariates[:, j] for j in selected])


def q_vector(gamma_bar: ArrayLike, selected: Sequence[int]) -> NDArray[np.float64]:
    gamma = np.atleast_1d(np.asarray(gamma_bar, dtype=np.float64)) if len(selected) else np.empty(0)
    if gamma.shape[0] != len(selected):
        raise ConfigError(f"gamma_bar has {gamma.shape[0]} entries for {len(selected)} covariates")
    return np.concatenate([[1.0], -gamma])


def deviations_for(
    sample: Sample,
    selected: Sequence[int],
    bandwidth: float,
    kernel: Union[KernelSpec, KernelFamily],
    j_neighbors: int = 3,
    estimator: VarianceEstimator = VarianceEstimator.NN,
) -> NDArray[np.float64]:
    """Per-observation deviation vectors of (Y, Z_sel)."""
    block = response_block(sample, selected)
    if VarianceEstimator(estimator) is VarianceEstimator.PLUGIN:
        return plugin_deviations(sample.centered, block, bandwidth, kernel)
    return nn_deviations(sample.centered, block, j_neighbors)


def _side_sigma(
    deviations: NDArray[np.float64], weights: NDArray[np.float64], mask: NDArray[np.bool_]
) -> NDArray[np.float64]:
    return weighted_covariance(deviations[mask], weights[mask] ** 2)


def bias_variance_estimates(
    sample: Sample,
    selected: Sequence[int],
    gamma_bar: ArrayLike,
    bandwidths: BandwidthPair,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    *,
    j_neighbors: int = 3,
    variance_estimator: VarianceEstimator = VarianceEstimator.NN,
    deviations: Optional[NDArray[np.float64]] = None,
) -> BiasVariance:
    """Bias and variance of the local linear jump estimator with covariates.

    Bias: ``0.5 * (c+ q'mu2+ - c- q'mu2-)`` with ``c = e1'(R'KR)^{-1}R'K (X/h)^2``
    per side and second derivatives from local quadratic fits at ``b``.
    Variance: ``n*h * sum l_i^2 (q'd_i)^2`` with ``l`` the intercept-difference
    weights and ``d_i`` the deviation vectors of ``(Y_i, Z_sel,i)``.
    """
    selected = tuple(selected)
    q = q_vector(gamma_bar, selected)
    xc = sample.centered
    h, b = bandwidths.h, bandwidths.b
    block = response_block(sample, selected)
    dev = (
        deviations
        if deviations is not None
        else deviations_for(sample, selected, h, kernel, j_neighbors, variance_estimator)
    )
    combined_dev = dev @ q

    intercept = {}
    curvature_weights = {}
    constants = {}
    mu2 = {}
    for side in Side:
        linear = local_poly_operator(xc, side, 1, h, kernel)
        quadratic = local_poly_operator(xc, side, 2, b, kernel)
        intercept[side] = linear[0]
        constants[side] = float(linear[0] @ (xc / h) ** 2)
        curvature_weights[side] = 2.0 * quadratic[2]
        mu2[side] = curvature_weights[side] @ block

    c_minus, c_plus = constants[Side.LEFT], constants[Side.RIGHT]
    bias = 0.5 * (c_plus * float(q @ mu2[Side.RIGHT]) - c_minus * float(q @ mu2[Side.LEFT]))

    ell = intercept[Side.RIGHT] - intercept[Side.LEFT]
    omega = ell - h**2 * 0.5 * (
        c_plus * curvature_weights[Side.RIGHT] - c_minus * curvature_weights[Side.LEFT]
    )
    normalizer = sample.n * h
    variance = normalizer * float(np.sum(ell**2 * combined_dev**2))
    variance_robust = normalizer * float(np.sum(omega**2 * combined_dev**2))
    bias_spread = sum(
        (0.5 * constants[side]) ** 2 * float(np.sum(curvature_weights[side] ** 2 * combined_dev**2))
        for side in Side
    )

    return BiasVariance(
        bias=bias,
        variance=variance,
        variance_robust=variance_robust,
        q_bar=q,
        mu2_minus=np.asarray(mu2[Side.LEFT]),
        mu2_plus=np.asarray(mu2[Side.RIGHT]),
        sigma_minus=_side_sigma(dev, intercept[Side.LEFT], side_mask(xc, Side.LEFT)),
        sigma_plus=_side_sigma(dev, intercept[Side.RIGHT], side_mask(xc, Side.RIGHT)),
        normalizer=normalizer,
        bandwidths=bandwidths,
        bias_spread=bias_spread,
    )


def kink_slope_weights(
    sample: Sample, h: float, kernel: Union[KernelSpec, KernelFamily]
) -> NDArray[np.float64]:
    """Per-observation weights of the slope change in the covariate-free kink regression."""
    design = build_design(sample, h, kernel, (), layout=DesignLayout.KINK)
    operator = hat_operator(design.g, design.weights)
    weights = np.zeros(sample.n)
    weights[np.asarray(design.rows)] = operator[1]
    return weights


def kink_bias_variance(
    sample: Sample,
    selected: Sequence[int],
    gamma_bar: ArrayLike,
    bandwidths: BandwidthPair,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    *,
    j_neighbors: int = 3,
    variance_estimator: VarianceEstimator = VarianceEstimator.NN,
    deviations: Optional[NDArray[np.float64]] = None,
) -> BiasVariance:
    """Bias and variance of the slope-change estimator in the kink regression.

    The leading bias is ``sum a_i (mu3_side / 6) X_i^3`` with third derivatives
    from one-sided local cubic fits at ``b``; it is reported divided by ``h^2``.
    Variance is scaled by ``n*h^3``.
    """
    selected = tuple(selected)
    q = q_vector(gamma_bar, selected)
    xc = sample.centered
    h, b = bandwidths.h, bandwidths.b
    block = response_block(sample, selected)
    dev = (
        deviations
        if deviations is not None
        else deviations_for(sample, selected, h, kernel, j_neighbors, variance_estimator)
    )
    combined_dev = dev @ q

    slope = kink_slope_weights(sample, h, kernel)
    omega = slope.copy()
    bias_total = 0.0
    mu3 = {}
    for side in Side:
        cubic = local_poly_operator(xc, side, 3, b, kernel)[3]
        mask = side_mask(xc, side)
        moment = float(slope[mask] @ xc[mask] ** 3)
        mu3[side] = 6.0 * (cubic @ block)
        bias_total += moment * float(q @ (cubic @ block))
        omega -= moment * cubic

    normalizer = sample.n * h**3
    variance = normalizer * float(np.sum(slope**2 * combined_dev**2))
    variance_robust = normalizer * float(np.sum(omega**2 * combined_dev**2))
    left, right = side_mask(xc, Side.LEFT), side_mask(xc, Side.RIGHT)

    return BiasVariance(
        bias=bias_total / h**2,
        variance=variance,
        variance_robust=variance_robust,
        q_bar=q,
        mu2_minus=np.asarray(mu3[Side.LEFT]),
        mu2_plus=np.asarray(mu3[Side.RIGHT]),
        sigma_minus=weighted_covariance(dev[left], slope[left] ** 2),
        sigma_plus=weighted_covariance(dev[right], slope[right] ** 2),
        normalizer=normalizer,
        bandwidths=bandwidths,
        bias_order=3,
    )


def combined_response(
    sample: Sample, selected: Sequence[int], gamma_bar: ArrayLike
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``q' V_i`` per observation together with ``q``."""
    q = q_vector(gamma_bar, selected)
    return response_block(sample, tuple(selected)) @ q, q
