"""Numerical laboratory for truncated Toeplitz operators on finite model
spaces: Blaschke data, Clark measures, trace identities and convergence
experiments."""

from .blaschke import (
    AngularDiagnostics,
    CirclePoint,
    FiniteBlaschke,
    ZeroSequence,
    abs_derivative_boundary,
    angular_partial_sums,
    beta_density,
    eval_blaschke,
    generate_zeros,
    model_kernel,
    nu_density,
    szego_kernel,
    szego_kernel_normalized,
    tmw_basis_eval,
)
from .clark import (
    ClarkMeasure,
    PhaseFunction,
    clark_beta_norm,
    clark_measure,
    clark_support,
    disintegration_check,
)
from .operators import (
    OperatorMatrix,
    ScalarFunction,
    SpectralData,
    SymbolRep,
    apply_function,
    build_clark_spectral,
    build_clark_unitary,
    build_truncated_toeplitz,
    compressed_shift,
    fejer_apply,
    hs_norm,
    inverse_derivative_symbol,
    op_norm,
    rank_one_defect,
    trace,
    trace_formula_rhs,
    trace_norm,
)
from .quadrature import (
    IntegralResult,
    QuadratureConfig,
    integrate_circle,
    nu_integral,
    poisson_integral,
    weighted_l2_norm,
)

__version__ = "0.1.0"
