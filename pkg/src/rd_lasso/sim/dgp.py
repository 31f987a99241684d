"""Simulation designs: running variable, covariate Z, W block and outcome."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..errors import ConfigError
from ..kernelfit.design import Sample
from . import coefficients as coef


class Dgp(str, Enum):
    DGP1 = "dgp1"
    DGP2 = "dgp2"
    DGP3 = "dgp3"


@dataclass(frozen=True)
class DgpSpec:
    """Design, sample size, covariate count and base seed.

    The estimators see ``p`` covariates: Z followed by ``W_1 .. W_{p-1}``.
    """

    dgp: Dgp
    n: int
    p: int
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the design."""
        object.__setattr__(self, "dgp", Dgp(self.dgp))
        if self.n < 50:
            raise ConfigError(f"Simulation sample size must be at least 50, got {self.n}")
        if self.p < 0:
            raise ConfigError("Covariate count cannot be negative")
        if self.p < 1 and self.dgp is not Dgp.DGP1:
            raise ConfigError(f"{self.dgp.value} needs at least one covariate")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("Seed must be a nonnegative 64-bit integer")


def _two_sided(x: NDArray[np.float64], left: Tuple[float, ...], right: Tuple[float, ...]) -> NDArray[np.float64]:
    return np.where(x < 0.0, polynomial.polyval(x, left), polynomial.polyval(x, right))


def mu_z(x: ArrayLike) -> NDArray[np.float64]:
    """E[Z | X = x]."""
    return _two_sided(np.asarray(x, dtype=np.float64), coef.MU_Z_LEFT, coef.MU_Z_RIGHT)


def mu_1(dgp: Dgp, x: ArrayLike) -> NDArray[np.float64]:
    """Direct effect of the running variable on the outcome."""
    xs = np.asarray(x, dtype=np.float64)
    if Dgp(dgp) is Dgp.DGP1:
        return _two_sided(xs, coef.MU1_DESIGN1_LEFT, coef.MU1_DESIGN1_RIGHT)
    return _two_sided(xs, coef.MU1_DESIGN23_LEFT, coef.MU1_DESIGN23_RIGHT)


def z_slopes(dgp: Dgp) -> Tuple[float, float]:
    """Coefficient on Z left and right of the cutoff."""
    if Dgp(dgp) is Dgp.DGP1:
        return (0.0, 0.0)
    return (coef.MU2_LEFT, coef.MU2_RIGHT)


def mu_2(dgp: Dgp, x: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    """Effect of Z, whose coefficient changes at the cutoff."""
    left, right = z_slopes(dgp)
    xs = np.asarray(x, dtype=np.float64)
    return np.where(xs < 0.0, left, right) * np.asarray(z, dtype=np.float64)


def pi_coefficients(dgp: Dgp, p: int) -> NDArray[np.float64]:
    """Coefficients on ``W_1 .. W_p``."""
    dgp = Dgp(dgp)
    if dgp is Dgp.DGP1:
        return np.zeros(p)
    decay = coef.PI_DECAY_DESIGN2 if dgp is Dgp.DGP2 else coef.PI_DECAY_DESIGN3
    return decay ** np.arange(1, p + 1, dtype=np.float64)


def conditional_mean(spec: DgpSpec, x: ArrayLike) -> NDArray[np.float64]:
    """E[Y | X = x]; W has mean zero and E[Z | X] = mu_z."""
    return mu_1(spec.dgp, x) + mu_2(spec.dgp, x, mu_z(x))


def true_tau(spec: DgpSpec) -> float:
    """Jump of E[Y | X = x] at zero."""
    left_slope, right_slope = z_slopes(spec.dgp)
    if spec.dgp is Dgp.DGP1:
        left, right = coef.MU1_DESIGN1_LEFT[0], coef.MU1_DESIGN1_RIGHT[0]
    else:
        left, right = coef.MU1_DESIGN23_LEFT[0], coef.MU1_DESIGN23_RIGHT[0]
    return (right + right_slope * coef.MU_Z_RIGHT[0]) - (left + left_slope * coef.MU_Z_LEFT[0])


def error_covariance() -> NDArray[np.float64]:
    """Covariance of (eps_y, eps_z)."""
    cross = coef.RHO * coef.SIGMA_Y * coef.SIGMA_Z
    return np.array([[coef.SIGMA_Y**2, cross], [cross, coef.SIGMA_Z**2]])


@lru_cache(maxsize=16)
def _w_cholesky(p: int) -> NDArray[np.float64]:
    toeplitz = linalg.toeplitz(coef.W_CORRELATION ** np.arange(p, dtype=np.float64))
    return np.asarray(linalg.cholesky(toeplitz, lower=True))


def replication_rng(spec: DgpSpec, replication: int) -> np.random.Generator:
    """Independent stream for one replication, derived from the base seed."""
    if replication < 0:
        raise ConfigError("Replication index cannot be negative")
    return np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(replication,)))


def draw_sample(spec: DgpSpec, replication: int) -> Sample:
    """Draw one sample; identical (spec, replication) pairs give identical samples."""
    rng = replication_rng(spec, replication)
    n, p = spec.n, spec.p

    x = 2.0 * rng.beta(2.0, 4.0, size=n) - 1.0
    errors = rng.multivariate_normal(np.zeros(2), error_covariance(), size=n)
    z = mu_z(x) + errors[:, 1]

    y = mu_1(spec.dgp, x) + mu_2(spec.dgp, x, z) + errors[:, 0]
    if p > 0:
        w = rng.standard_normal((n, p)) @ _w_cholesky(p).T
        y = y + w @ pi_coefficients(spec.dgp, p)
        covariates = np.column_stack([z, w[:, : p - 1]])
    else:
        covariates = np.empty((n, 0))

    names = ("z",) + tuple(f"w{j}" for j in range(1, p))
    return Sample(x=x, y=y, z=covariates, cutoff=0.0, covariate_names=names[:p])
