"""Bergman kernels, curvature coefficients and Morse integrals for model line bundles."""

from ._core import (
    BergmanError,
    BergmanKernel,
    Chart,
    ModelGeometry,
    MorseQuad,
    QuadSpec,
    __version__,
    closed_form_kernel,
    coefficient_set,
    coefficient_set_stationary_phase,
    curvature_report,
    degeneracy_bound,
    eikonal_residual,
    exact_dims,
    expansion_fit,
    heat_constant_C,
    heat_trace_density,
    morse_integral,
    strata_integrals,
    strong_morse_check,
    vanishing_check,
)

__all__ = [
    "BergmanError",
    "BergmanKernel",
    "Chart",
    "ModelGeometry",
    "MorseQuad",
    "QuadSpec",
    "__version__",
    "closed_form_kernel",
    "coefficient_set",
    "coefficient_set_stationary_phase",
    "curvature_report",
    "degeneracy_bound",
    "eikonal_residual",
    "exact_dims",
    "expansion_fit",
    "heat_constant_C",
    "heat_trace_density",
    "morse_integral",
    "strata_integrals",
    "strong_morse_check",
    "vanishing_check",
]
