"""Kernel-weighted Lasso by cyclic coordinate descent.

The unpenalized block is profiled out exactly on the sqrt(K)-scaled data, and
coordinate descent runs with covariance updates on the residualized penalized
columns. Sweeps alternate between the full coordinate set and the active set.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from loguru import logger
from scipy import linalg

from ..errors import ConfigError, NotConvergedError, SingularDesignError
from ..kernelfit.design import Design
from ..kernelfit.wls import RCOND_THRESHOLD
from .penalty import PenaltyConfig

_THRESHOLD_SLACK: float = 1e-12
_HELD_CURVATURE: float = 1e-12


@dataclass(frozen=True, eq=False)
class LassoFit:
    """Solution of one local Lasso problem."""

    theta: NDArray[np.float64]
    support: Tuple[int, ...]
    lambda_used: float
    objective: float
    iterations: int
    converged: bool
    loadings: NDArray[np.float64]
    unpenalized: Tuple[int, ...]
    base_columns: int
    covariate_index: Tuple[int, ...]
    column_labels: Tuple[str, ...]

    @property
    def tau(self) -> float:
        """Coefficient of the parameter of interest (column 1)."""
        return float(self.theta[1])

    @property
    def gamma(self) -> NDArray[np.float64]:
        return self.theta[self.base_columns :]

    @property
    def covariate_support(self) -> Tuple[int, ...]:
        """Design columns of nonzero covariate coefficients."""
        return tuple(j for j in self.support if j >= self.base_columns)

    @property
    def selected_covariates(self) -> Tuple[int, ...]:
        """Original covariate indices with nonzero coefficients."""
        return tuple(self.covariate_index[j - self.base_columns] for j in self.covariate_support)


def resolve_loadings(design: Design, penalty: PenaltyConfig) -> NDArray[np.float64]:
    """Per-column penalty loadings; zero for exempt columns.

    Default loadings are kernel-weighted standard deviations. Columns constant in the
    window fall back to their weighted root mean square; all-zero columns get an
    infinite loading, which pins them at zero.
    """
    k: int = design.n_columns
    exempt: FrozenSet[int] = penalty.unpenalized_for(design.base_columns)

    if penalty.loadings is not None:
        if len(penalty.loadings) != k:
            raise ConfigError(f"Expected {k} penalty loadings, got {len(penalty.loadings)}")
        loadings = np.array(penalty.loadings, dtype=np.float64)
    else:
        w = design.weights / design.weights.sum()
        mean = w @ design.g
        sd = np.sqrt(w @ (design.g - mean) ** 2)
        rms = np.sqrt(w @ design.g**2)
        scale = np.maximum(rms, 1.0)
        loadings = np.where(sd > 1e-12 * scale, sd, rms)
        loadings = np.where(loadings > 0, loadings, np.inf)

    if any(j < 0 or j >= k for j in exempt):
        raise ConfigError(f"Unpenalized columns {sorted(exempt)} outside 0..{k - 1}")
    loadings[sorted(exempt)] = 0.0
    return loadings


class ProfiledProblem:
    """Penalized least squares with the exempt block projected out.

    Reused across penalty levels (CV paths) and loading refreshes (plug-in rule).
    """

    def __init__(self, design: Design, unpenalized: FrozenSet[int]) -> None:
        k = design.n_columns
        if any(j < 0 or j >= k for j in unpenalized):
            raise ConfigError(f"Unpenalized columns {sorted(unpenalized)} outside 0..{k - 1}")

        self.design: Design = design
        self.free: List[int] = sorted(unpenalized)
        self.penalized: List[int] = [j for j in range(k) if j not in unpenalized]

        root = np.sqrt(design.weights)
        a = design.g * root[:, None]
        b = design.response * root
        n_scale = design.normalizer
        a_pen = a[:, self.penalized]

        self._q: Optional[NDArray[np.float64]] = None
        self._r: Optional[NDArray[np.float64]] = None
        if self.free:
            q, r = linalg.qr(a[:, self.free], mode="economic")
            cond = float(np.linalg.cond(r)) if r.size else math.inf
            if not np.isfinite(cond) or 1.0 / cond**2 < RCOND_THRESHOLD:
                raise SingularDesignError("Unpenalized block of the Lasso design is singular")
            self._q, self._r = q, r
            a_pen = a_pen - q @ (q.T @ a_pen)
            b_res = b - q @ (q.T @ b)
        else:
            b_res = b

        self._a: NDArray[np.float64] = a
        self._b: NDArray[np.float64] = b
        # Unscaled penalized columns and response net of the exempt block.
        self.partialled_columns: NDArray[np.float64] = a_pen / root[:, None]
        self.partialled_response: NDArray[np.float64] = b_res / root
        self.hessian: NDArray[np.float64] = a_pen.T @ a_pen / n_scale
        self.score: NDArray[np.float64] = a_pen.T @ b_res / n_scale
        raw_curvature = np.sum(a[:, self.penalized] ** 2, axis=0) / n_scale
        curvature = np.diag(self.hessian).copy()
        self.held: NDArray[np.bool_] = curvature <= _HELD_CURVATURE * np.maximum(raw_curvature, 1e-300)
        self.curvature: NDArray[np.float64] = curvature

    def lambda_max(self, penalized_loadings: NDArray[np.float64]) -> float:
        """Smallest level with every penalized coefficient at zero."""
        usable = (~self.held) & np.isfinite(penalized_loadings) & (penalized_loadings > 0)
        if not np.any(usable):
            return 0.0
        return float(np.max(2.0 * np.abs(self.score[usable]) / penalized_loadings[usable]))

    def solve(
        self,
        lam: float,
        penalized_loadings: NDArray[np.float64],
        tolerance: float,
        max_sweeps: int,
        initial: Optional[NDArray[np.float64]] = None,
    ) -> Tuple[NDArray[np.float64], int, bool]:
        """Coordinate descent over the penalized block.

        Returns:
            Penalized coefficients, sweeps used, and whether the change criterion was met.
        """
        p = len(self.penalized)
        theta = np.zeros(p) if initial is None else np.array(initial, dtype=np.float64)
        if p == 0:
            return theta, 0, True

        blocked = self.held | ~np.isfinite(penalized_loadings)
        theta[blocked] = 0.0
        grad = self.score - self.hessian @ theta
        thresholds = (0.5 * lam * np.where(blocked, 0.0, penalized_loadings)).tolist()
        curvature = self.curvature.tolist()
        hessian = self.hessian
        coordinates = [j for j in range(p) if not blocked[j]]

        def sweep(indices: Sequence[int]) -> float:
            largest = 0.0
            for j in indices:
                old = theta[j]
                z = grad[j] + curvature[j] * old
                thr = thresholds[j]
                if abs(z) <= thr * (1.0 + _THRESHOLD_SLACK):
                    new = 0.0
                else:
                    new = math.copysign(abs(z) - thr, z) / curvature[j]
                if new != old:
                    delta = new - old
                    grad[:] -= hessian[j] * delta
                    theta[j] = new
                    largest = max(largest, abs(delta))
            return largest

        sweeps = 0
        converged = False
        while sweeps < max_sweeps:
            change = sweep(coordinates)
            sweeps += 1
            if change < tolerance * (1.0 + float(np.max(np.abs(theta)))):
                converged = True
                break
            while sweeps < max_sweeps:
                active = [j for j in coordinates if theta[j] != 0.0]
                change = sweep(active)
                sweeps += 1
                if change < tolerance * (1.0 + float(np.max(np.abs(theta)))):
                    break
        return theta, sweeps, converged

    def assemble(self, theta_pen: NDArray[np.float64]) -> NDArray[np.float64]:
        """Full coefficient vector with the exempt block at its exact partial minimizer."""
        theta = np.zeros(self.design.n_columns)
        theta[self.penalized] = theta_pen
        if self.free:
            assert self._q is not None and self._r is not None
            partial = self._b - self._a[:, self.penalized] @ theta_pen
            theta[self.free] = linalg.solve_triangular(self._r, self._q.T @ partial)
        return theta


def lasso_objective(design: Design, theta: NDArray[np.float64], lam: float, loadings: NDArray[np.float64]) -> float:
    """(1/(nh)) sum K (Y - G theta)^2 + lam * sum psi |theta| over penalized columns."""
    resid = design.response - design.g @ theta
    fit_term = float(design.weights @ resid**2) / design.normalizer
    finite = np.where(np.isfinite(loadings), loadings, 0.0)
    return fit_term + lam * float(np.sum(finite * np.abs(theta)))


def fit_with_problem(
    problem: ProfiledProblem,
    penalty: PenaltyConfig,
    loadings: NDArray[np.float64],
    initial: Optional[NDArray[np.float64]] = None,
) -> LassoFit:
    """Solve a prepared problem at ``penalty.lam`` with full-length ``loadings``."""
    design = problem.design
    pen_loadings = loadings[problem.penalized]
    theta_pen, sweeps, converged = problem.solve(
        penalty.lam, pen_loadings, penalty.tolerance, penalty.max_sweeps, initial
    )
    theta = problem.assemble(theta_pen)
    if not converged:
        logger.warning(
            f"Local Lasso did not converge in {sweeps} sweeps (lambda={penalty.lam:.4g})"
        )
    return LassoFit(
        theta=theta,
        support=tuple(int(j) for j in np.flatnonzero(theta != 0.0)),
        lambda_used=float(penalty.lam),
        objective=lasso_objective(design, theta, penalty.lam, loadings),
        iterations=sweeps,
        converged=converged,
        loadings=loadings,
        unpenalized=tuple(problem.free),
        base_columns=design.base_columns,
        covariate_index=design.covariate_index,
        column_labels=design.column_labels,
    )


def fit_local_lasso(
    design: Design,
    penalty: PenaltyConfig,
    *,
    initial: Optional[NDArray[np.float64]] = None,
    raise_on_failure: bool = False,
) -> LassoFit:
    """Minimize (1/(nh)) sum K (Y - G theta)^2 + lam * sum psi_j |theta_j|.

    Args:
        design: Localized design.
        penalty: Level, exempt columns and loadings (``penalty.lam`` is used as is).
        initial: Warm start for the penalized coefficients.
        raise_on_failure: Raise ``NotConvergedError`` instead of returning an
            unconverged fit.

    Returns:
        LassoFit with ``converged`` set from the coefficient-change criterion.
    """
    loadings = resolve_loadings(design, penalty)
    problem = ProfiledProblem(design, penalty.unpenalized_for(design.base_columns))
    fit = fit_with_problem(problem, penalty, loadings, initial)
    logger.debug(
        f"Local Lasso: lambda={fit.lambda_used:.4g}, sweeps={fit.iterations}, "
        f"{len(fit.covariate_support)} covariates active"
    )
    if raise_on_failure and not fit.converged:
        raise NotConvergedError(f"Local Lasso did not converge in {fit.iterations} sweeps", fit)
    return fit


def lambda_max(design: Design, penalty: PenaltyConfig) -> float:
    """max_j |(2/(nh)) sum K G_j Y_perp| / psi_j, Y_perp the residual on the exempt block."""
    loadings = resolve_loadings(design, penalty)
    problem = ProfiledProblem(design, penalty.unpenalized_for(design.base_columns))
    return problem.lambda_max(loadings[problem.penalized])


def check_kkt(design: Design, fit: LassoFit) -> float:
    """Largest violation of the Lasso optimality conditions at ``fit``."""
    resid = design.response - design.g @ fit.theta
    grad = 2.0 * (design.g.T @ (design.weights * resid)) / design.normalizer
    exempt = set(fit.unpenalized)
    worst = 0.0
    for j, (g_j, theta_j, psi_j) in enumerate(zip(grad, fit.theta, fit.loadings)):
        if j in exempt:
            violation = abs(g_j)
        elif not np.isfinite(psi_j):
            violation = 0.0
        elif theta_j != 0.0:
            violation = abs(g_j - fit.lambda_used * psi_j * math.copysign(1.0, theta_j))
        else:
            violation = max(0.0, abs(g_j) - fit.lambda_used * psi_j)
        worst = max(worst, float(violation))
    return worst
