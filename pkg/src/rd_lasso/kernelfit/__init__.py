"""Kernels, localized designs and weighted least squares."""

from .design import Design, DesignLayout, Sample, build_design, drop_collinear_covariates
from .kernels import (
    KernelConstants,
    KernelFamily,
    KernelSpec,
    kernel_constants,
    kernel_weight,
    kernel_weights,
)
from .wls import RCOND_THRESHOLD, OlsFit, hat_operator, solve_weighted, weighted_ols

__all__ = [
    "Design",
    "DesignLayout",
    "Sample",
    "build_design",
    "drop_collinear_covariates",
    "KernelConstants",
    "KernelFamily",
    "KernelSpec",
    "kernel_constants",
    "kernel_weight",
    "kernel_weights",
    "RCOND_THRESHOLD",
    "OlsFit",
    "hat_operator",
    "solve_weighted",
    "weighted_ols",
]
