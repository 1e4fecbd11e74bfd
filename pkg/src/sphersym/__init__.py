"""Weighted metrics on vector bundle total spaces: closed-form Laplacians,
biharmonic function families, and an independent numerical cross-check."""

from .errors import CapabilityError, ConfigurationError, DomainError, GeometryError
from .fields import (
    BaseFunction,
    RadialFunction,
    RawCoordinate,
    RRadial,
    VerticalLift,
    gaussian_base,
    inverse_norm_base,
    norm_sq_base,
    poly_base,
    radial_polynomial,
    saddle_base,
)
from .families import (
    ExponentRoots,
    FamilyParams,
    base_example_inverse_norm,
    classify,
    classify_vertical_lift,
    equation_E_prime_residual,
    equation_E_residual,
    exponent_roots,
    power_ode_residual,
    radial_family,
    sasaki_radial_residual,
)
from .geometry import (
    BaseChart,
    BundleConfig,
    MetricField,
    TotalPoint,
    adapted_frame,
    check_levi_civita_flat,
    div_xi_closed_form,
    diagonal_chart,
    euclidean_chart,
    radius,
    tautological_components,
    xi_field,
)
from .operators import (
    bihar_radial_transcription,
    bilaplacian_radial,
    bilaplacian_vertical_lift,
    grad_radial,
    grad_vertical_lift,
    laplacian_radial,
    laplacian_vertical_lift,
    radial_laplacian_profile,
    transcription_comparison,
)
from .oracle import (
    DiffConfig,
    bilaplacian_numeric,
    directional_derivative,
    divergence_numeric,
    gradient_numeric,
    laplace_beltrami_numeric,
)
from .weights import (
    WeightProfile,
    check_regularity,
    eval_weight,
    log_weight,
    polynomial_weight,
    preset,
    zero_weight,
)

__version__ = "0.1.0"
