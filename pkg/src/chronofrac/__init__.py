"""Fractional calculus on time scales and the nonlocal thermistor solver."""

from .conductivity import (
    BoundedRational,
    ClampedAffine,
    ConductivityModel,
    Constant,
    Table,
    eval_f,
    model_from_json,
)
from .fractional import (
    CompositionReport,
    FracOrder,
    KernelWeights,
    frac_derivative,
    frac_derivative_all,
    frac_integral,
    frac_integral_all,
    frac_integral_operator,
    gamma_fn,
    kernel_weights,
    verify_composition,
)
from .solver import (
    DiagnosticCheck,
    ExistenceDiagnostics,
    ProblemSpec,
    SolveReport,
    apply_K,
    contraction_constant,
    contraction_terms,
    denominator,
    equicontinuity_modulus,
    existence_diagnostics,
    picard_solve,
    problem_from_json,
    sup_bound,
    threshold_from_constants,
    uniqueness_threshold,
)
from .timescale import SNAP, Grid, GridFunction, TimeScale, build_grid, delta_integral

__version__ = "0.1.0"

__all__ = [
    "SNAP",
    "TimeScale",
    "Grid",
    "GridFunction",
    "build_grid",
    "delta_integral",
    "FracOrder",
    "KernelWeights",
    "CompositionReport",
    "gamma_fn",
    "kernel_weights",
    "frac_integral",
    "frac_integral_all",
    "frac_integral_operator",
    "frac_derivative",
    "frac_derivative_all",
    "verify_composition",
    "ConductivityModel",
    "Constant",
    "ClampedAffine",
    "BoundedRational",
    "Table",
    "eval_f",
    "model_from_json",
    "ProblemSpec",
    "SolveReport",
    "DiagnosticCheck",
    "ExistenceDiagnostics",
    "contraction_terms",
    "threshold_from_constants",
    "denominator",
    "apply_K",
    "contraction_constant",
    "uniqueness_threshold",
    "sup_bound",
    "equicontinuity_modulus",
    "picard_solve",
    "existence_diagnostics",
    "problem_from_json",
    "__version__",
]
