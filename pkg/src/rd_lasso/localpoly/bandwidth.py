"""MSE-optimal bandwidths for the jump and kink estimators."""

from __future__ import annotations

import math
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from ..errors import ConfigError, DataError, EmptySideError
from ..kernelfit.design import Sample
from ..kernelfit.kernels import KernelFamily, KernelSpec
from .bias_variance import (
    BandwidthPair,
    VarianceEstimator,
    bias_variance_estimates,
    combined_response,
    deviations_for,
    kink_bias_variance,
)
from .fits import Side, local_poly_operator, side_mask

PILOT_CONSTANT: float = 2.58
NEAR_ZERO_BIAS: float = 1e-12


def rule_of_thumb_bandwidth(x: ArrayLike, constant: float = PILOT_CONSTANT) -> float:
    """constant * sd(x) * n^(-1/5).

    Raises:
        DataError: The running variable has no spread.
    """
    xs = np.asarray(x, dtype=np.float64)
    if xs.shape[0] < 2:
        raise DataError("Rule-of-thumb bandwidth needs at least two observations")
    sd = float(np.std(xs, ddof=1))
    if not sd > 0:
        raise DataError("Running variable is constant; no bandwidth can be chosen")
    return constant * sd * xs.shape[0] ** (-0.2)


def range_cap(x_centered: ArrayLike) -> float:
    """Range of the running variable on the shorter side of the cutoff."""
    xs = np.asarray(x_centered, dtype=np.float64)
    left = xs[side_mask(xs, Side.LEFT)]
    right = xs[side_mask(xs, Side.RIGHT)]
    if left.size == 0 or right.size == 0:
        raise EmptySideError("Observations are needed on both sides of the cutoff")
    return float(min(right.max(), -left.min()))


def _capped(value: float, cap: float) -> float:
    if not math.isfinite(value) or value <= 0 or value > cap:
        logger.warning(f"Bandwidth capped at {cap:.4g} (unconstrained value {value:.4g})")
        return cap
    return value


def mse_objective(h: float, bias: float, variance: float, n: int, variance_power: int = 1) -> float:
    """h^4 B^2 + V / (n h^power); power 1 for jumps, 3 for kinks."""
    return h**4 * bias**2 + variance / (n * h**variance_power)


def mse_optimal_h(bias: float, variance: float, n: int, cap: float, bias_spread: float = 0.0) -> float:
    """Minimizer (V / (4 n (B^2 + R)))^(1/5) of the jump MSE, capped at ``cap``.

    ``bias_spread`` is the regularization term ``R`` added to the squared bias.
    """
    if variance < 0 or n < 1 or bias_spread < 0:
        raise ConfigError("Variance and regularization must be nonnegative and n positive")
    denominator = bias**2 + bias_spread
    if denominator == 0.0 or denominator < NEAR_ZERO_BIAS * variance:
        logger.warning(f"Near-zero curvature; bandwidth set to the range cap {cap:.4g}")
        return cap
    return _capped((variance / (4.0 * n * denominator)) ** 0.2, cap)


def mse_optimal_kink_h(bias: float, variance: float, n: int, cap: float) -> float:
    """Minimizer (3V / (4 n B^2))^(1/7) of the kink MSE, capped at ``cap``."""
    if variance < 0 or n < 1:
        raise ConfigError("Variance must be nonnegative and n positive")
    if bias == 0.0 or bias**2 < NEAR_ZERO_BIAS * variance:
        logger.warning(f"Near-zero third derivative; bandwidth set to the range cap {cap:.4g}")
        return cap
    return _capped((3.0 * variance / (4.0 * n * bias**2)) ** (1.0 / 7.0), cap)


def _derivative_step(
    x_centered: NDArray[np.float64],
    combined_dev: NDArray[np.float64],
    degree: int,
    b0: float,
    higher: Dict[Side, float],
    higher_spread: Dict[Side, float],
    regularization: float,
    cap: float,
    kernel: Union[KernelSpec, KernelFamily],
) -> float:
    """MSE-optimal bandwidth for the one-sided coefficients of ``x**degree``.

    Each side's coefficient has variance and leading bias read off a local fit of
    that degree at ``b0``; the bias is driven by ``higher``, the coefficient of
    ``x**(degree+1)``, whose own sampling variance ``higher_spread`` enters as a
    regularization term.
    """
    power = 2 * degree + 1
    variance = 0.0
    difference = 0.0
    spread = 0.0
    for side, sign in ((Side.RIGHT, 1.0), (Side.LEFT, -1.0)):
        weights = local_poly_operator(x_centered, side, degree, b0, kernel)[degree]
        variance += float(np.sum(weights**2 * combined_dev**2))
        leading = b0**degree * float(weights @ (x_centered / b0) ** (degree + 1))
        difference += sign * leading * higher[side]
        spread += leading**2 * higher_spread[side]
    numerator = power * b0**power * variance
    denominator = 2.0 * (difference**2 + 3.0 * regularization * spread)
    if denominator == 0.0 or denominator < NEAR_ZERO_BIAS * numerator:
        return cap
    return _capped((numerator / denominator) ** (1.0 / (power + 2)), cap)


def _side_coefficients(
    x_centered: NDArray[np.float64],
    combined_y: NDArray[np.float64],
    combined_dev: NDArray[np.float64],
    degree: int,
    bandwidths: Dict[Side, float],
    kernel: Union[KernelSpec, KernelFamily],
) -> Tuple[Dict[Side, float], Dict[Side, float]]:
    """Per-side coefficient of ``x**degree`` and its estimated sampling variance."""
    coefficient: Dict[Side, float] = {}
    spread: Dict[Side, float] = {}
    for side in Side:
        weights = local_poly_operator(x_centered, side, degree, bandwidths[side], kernel)[degree]
        coefficient[side] = float(weights @ combined_y)
        spread[side] = float(np.sum(weights**2 * combined_dev**2))
    return coefficient, spread


def third_derivative_bandwidth(
    x_centered: NDArray[np.float64],
    combined_y: NDArray[np.float64],
    combined_dev: NDArray[np.float64],
    b0: float,
    cap: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
) -> float:
    """Bandwidth for the one-sided local cubic fits that feed the curvature pilot.

    The fourth-order coefficients driving its bias come from a global quartic
    fit over each side.
    """
    spans = {
        side: float(np.max(np.abs(x_centered[side_mask(x_centered, side)]))) * (1.0 + 1e-8)
        for side in Side
    }
    quartic, _ = _side_coefficients(x_centered, combined_y, combined_dev, 4, spans, kernel)
    no_spread = {side: 0.0 for side in Side}
    return _derivative_step(x_centered, combined_dev, 3, b0, quartic, no_spread, 0.0, cap, kernel)


def pilot_curvature_bandwidth(
    x_centered: NDArray[np.float64],
    combined_y: NDArray[np.float64],
    combined_dev: NDArray[np.float64],
    b0: float,
    cap: float,
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    *,
    regularization: float = 1.0,
    third_bandwidth: Optional[float] = None,
) -> float:
    """MSE-optimal bandwidth for the difference of one-sided second derivatives.

    The bias of each local quadratic second derivative is driven by the third
    derivative, estimated by local cubic fits at ``third_bandwidth`` (chosen by
    :func:`third_derivative_bandwidth` when omitted). The MSE
    ``b^2 B^2 + V / (n b^5)`` is minimized at ``(5V / (2 n (B^2 + R)))^(1/7)``
    where ``R`` is ``3 * regularization`` times the variance of the bias estimate.
    """
    d = (
        third_derivative_bandwidth(x_centered, combined_y, combined_dev, b0, cap, kernel)
        if third_bandwidth is None
        else third_bandwidth
    )
    cubic, cubic_spread = _side_coefficients(
        x_centered, combined_y, combined_dev, 3, {side: d for side in Side}, kernel
    )
    return _derivative_step(
        x_centered, combined_dev, 2, b0, cubic, cubic_spread, regularization, cap, kernel
    )


def mse_optimal_bandwidth(
    sample: Sample,
    selected: Sequence[int] = (),
    gamma_bar: ArrayLike = (),
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    *,
    restricted: bool = False,
    pilot_constant: float = PILOT_CONSTANT,
    j_neighbors: int = 3,
    variance_estimator: VarianceEstimator = VarianceEstimator.NN,
    regularization: float = 1.0,
) -> BandwidthPair:
    """MSE-optimal main bandwidth ``h`` and pilot bandwidth ``b`` for the jump estimator.

    Three steps share the deviations at the rule-of-thumb bandwidth ``b0``: a
    bandwidth for the third derivatives, then ``b`` for the second derivatives,
    then ``h`` minimizing ``h^4 (B^2 + R) + V / (n h)``. ``R`` is ``3 * regularization``
    times the estimated variance of ``B``; zero gives the unregularized selector.
    ``restricted`` returns ``b = h``.

    Raises:
        DataError: Constant running variable or an empty side.
        InsufficientDataError: Too few observations for the pilot fits.
    """
    selected = tuple(selected)
    xc = sample.centered
    cap = range_cap(xc)
    b0 = min(rule_of_thumb_bandwidth(sample.x, pilot_constant), cap)

    dev = deviations_for(sample, selected, b0, kernel, j_neighbors, variance_estimator)
    combined_y, q = combined_response(sample, selected, gamma_bar)
    if regularization < 0:
        raise ConfigError("Bandwidth regularization must be nonnegative")
    b = pilot_curvature_bandwidth(
        xc, combined_y, dev @ q, b0, cap, kernel, regularization=regularization
    )

    estimates = bias_variance_estimates(
        sample,
        selected,
        gamma_bar,
        BandwidthPair(h=b0, b=b),
        kernel,
        j_neighbors=j_neighbors,
        deviations=dev,
    )
    h = mse_optimal_h(
        estimates.bias,
        estimates.variance,
        sample.n,
        cap,
        3.0 * regularization * estimates.bias_spread,
    )
    logger.debug(
        f"MSE-optimal bandwidth h={h:.4f} b={b:.4f} (pilot {b0:.4f}, {len(selected)} covariates)"
    )
    if restricted:
        return BandwidthPair.equal(h)
    return BandwidthPair(h=h, b=b)


def mse_optimal_kink_bandwidth(
    sample: Sample,
    selected: Sequence[int] = (),
    gamma_bar: ArrayLike = (),
    kernel: Union[KernelSpec, KernelFamily] = KernelFamily.TRIANGULAR,
    *,
    restricted: bool = False,
    pilot_constant: float = PILOT_CONSTANT,
    j_neighbors: int = 3,
    variance_estimator: VarianceEstimator = VarianceEstimator.NN,
) -> BandwidthPair:
    """MSE-optimal bandwidth for the slope-change estimator.

    Third derivatives come from local cubic fits at the rule-of-thumb ``b0``,
    which is also returned as the pilot bandwidth unless ``restricted``.
    """
    selected = tuple(selected)
    cap = range_cap(sample.centered)
    b0 = min(rule_of_thumb_bandwidth(sample.x, pilot_constant), cap)
    estimates = kink_bias_variance(
        sample,
        selected,
        gamma_bar,
        BandwidthPair(h=b0, b=b0),
        kernel,
        j_neighbors=j_neighbors,
        variance_estimator=variance_estimator,
    )
    h = mse_optimal_kink_h(estimates.bias, estimates.variance, sample.n, cap)
    logger.debug(f"Kink bandwidth h={h:.4f} (pilot {b0:.4f})")
    if restricted:
        return BandwidthPair.equal(h)
    return BandwidthPair(h=h, b=b0)
