"""Post-Lasso refits and covariate selection rules."""

from __future__ import annotations

from dataclasses import dataclass, replace
import math
from typing import Iterable, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import ConfigError
from ..kernelfit.design import Design
from ..kernelfit.wls import weighted_ols
from .penalty import PenaltyConfig, SelectionSource, ThresholdRule
from .solver import LassoFit, fit_local_lasso, resolve_loadings


def rho_n(n: int) -> float:
    """log log log n, defined (positive) for n >= 16."""
    if n < 16:
        raise ConfigError(f"Scaled-threshold selection needs n >= 16, got {n}")
    return math.log(math.log(math.log(n)))


def post_lasso(design: Design, support: Iterable[int]) -> NDArray[np.float64]:
    """Weighted OLS on ``support``; coefficients outside it are exact zeros.

    Raises:
        ConfigError: If the support omits a base column.
        SingularDesignError: Propagated from the refit.
    """
    columns = sorted(set(int(j) for j in support))
    missing = [j for j in design.base_index if j not in columns]
    if missing:
        raise ConfigError(f"Post-Lasso support must contain the base columns, missing {missing}")

    coef = weighted_ols(design.restrict(columns)).coef
    theta = np.zeros(design.n_columns)
    theta[columns] = coef
    return theta


def selection_set(
    fit: LassoFit,
    rule: ThresholdRule,
    n: int,
    lam: Optional[float] = None,
) -> Tuple[int, ...]:
    """Original covariate indices read off a Lasso fit.

    ``SUPPORT`` keeps every nonzero covariate coefficient. ``SCALED_THRESHOLD`` keeps
    ``|gamma_j| > lam * rho_n * #{gamma != 0}``.
    """
    rule = ThresholdRule(rule)
    if rule is ThresholdRule.SUPPORT:
        return tuple(sorted(fit.selected_covariates))

    level = fit.lambda_used if lam is None else lam
    gamma = fit.gamma
    count = int(np.count_nonzero(gamma))
    threshold = level * rho_n(n) * count
    keep = np.flatnonzero(np.abs(gamma) > threshold) if count else np.array([], dtype=int)
    return tuple(sorted(fit.covariate_index[int(j)] for j in keep))


@dataclass(frozen=True)
class SelectionSources:
    """Covariates read off the fully penalized and the partially penalized fits."""

    full: Tuple[int, ...]
    partial: Tuple[int, ...]

    def pick(self, source: SelectionSource) -> Tuple[int, ...]:
        return self.full if SelectionSource(source) is SelectionSource.FULL else self.partial


def selection_sources(
    design: Design,
    penalty: PenaltyConfig,
    n: int,
    partial_fit: Optional[LassoFit] = None,
) -> SelectionSources:
    """Apply ``penalty.threshold_rule`` to both penalization modes at ``penalty.lam``.

    ``partial_fit`` reuses an existing partially penalized fit at the same penalty.
    """
    partial = fit_local_lasso(design, penalty) if partial_fit is None else partial_fit
    full_penalty = penalty.fully_penalized()
    if penalty.loadings is not None:
        # exempt columns carry zero loadings in a tuned config; give them standardized ones
        standard = resolve_loadings(design, replace(full_penalty, loadings=None))
        tuned = np.array(penalty.loadings)
        exempt = sorted(penalty.unpenalized_for(design.base_columns))
        tuned[exempt] = standard[exempt]
        full_penalty = replace(full_penalty, loadings=tuple(tuned))
    full = fit_local_lasso(design, full_penalty)
    return SelectionSources(
        full=selection_set(full, penalty.threshold_rule, n),
        partial=selection_set(partial, penalty.threshold_rule, n),
    )


@dataclass(frozen=True)
class LassoDiagnostics:
    """Post-Lasso deviation bound next to the observed deviation."""

    bound: float
    deviation: float
    min_eigenvalue: float
    support_size: int


def lasso_diagnostics(design: Design, fit: LassoFit) -> LassoDiagnostics:
    """lam * |S| / lambda_min(Gram_S) against |post-Lasso - Lasso|_1 on S = base + support."""
    columns = sorted(set(design.base_index) | set(fit.support))
    min_eig = float(np.linalg.eigvalsh(design.restrict(columns).gram())[0])
    refit = post_lasso(design, columns)
    deviation = float(np.sum(np.abs(refit[columns] - fit.theta[columns])))
    bound = post_lasso_deviation_bound(design, columns, fit.lambda_used)
    return LassoDiagnostics(
        bound=bound, deviation=deviation, min_eigenvalue=min_eig, support_size=len(columns)
    )


def post_lasso_deviation_bound(design: Design, support: Iterable[int], lam: float) -> float:
    """lam * |S| / lambda_min of the normalized Gram matrix restricted to S."""
    columns = sorted(set(design.base_index) | set(int(j) for j in support))
    min_eig = float(np.linalg.eigvalsh(design.restrict(columns).gram())[0])
    if min_eig <= 0:
        return math.inf
    return lam * len(columns) / min_eig
