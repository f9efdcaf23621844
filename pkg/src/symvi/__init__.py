"""Symmetry-induced statistic recovery in variational inference.

f-divergence minimization over location-scale families on R^d and von
Mises-Fisher families on the sphere, with statistic extractors and checkers
that certify which target statistics a variational minimizer recovers.
"""

from .divergence import (
    CHI_SQUARED,
    FORWARD_KL,
    GENERATORS,
    REVERSE_KL,
    SQUARED_HELLINGER,
    TOTAL_VARIATION,
    Density,
    DivergenceGenerator,
    QuadratureSpec,
    box_quadrature,
    check_pushforward_invariance,
    default_box,
    divergence_monte_carlo,
    divergence_quadrature,
    eval_generator,
    get_generator,
    integrate_density,
    sphere_quadrature,
    swap_generator,
)
from .errors import (
    DegenerateStatisticError,
    InvalidInputError,
    OptimizationFailedError,
    ProjectionUndefinedError,
)
from .euclidean import (
    AffineMap,
    EllipticalTargetSpec,
    LocScaleFamily,
    LocScaleParams,
    canonical_elliptical_target,
    canonical_even_target,
    check_invariance,
    correlation,
    covariance,
    elliptical_group_map,
    fixed_set_checks,
    gaussian_density,
    gaussian_mixture_density,
    make_elliptical_target,
    make_even_target,
    mean,
    member_density,
    pushforward_density,
    pushforward_params,
    reflection_map,
    student_like_profile,
)
from .optimize import FitResult, OptConfig, fit_locscale, fit_vmf, orbit_objective_check
from .sphere import (
    AxialTarget,
    Line,
    SphereMoments,
    VmfParams,
    axial_density,
    axial_log_density,
    axis_statistic,
    eta_critical,
    lambert_inverse,
    lambert_project,
    marginal_moments,
    predicted_minimizer_c,
    reverse_kl_objective,
    sample_vmf,
    vmf_density,
    vmf_log_density,
    vmf_sampler,
)

__version__ = "0.1.0"
