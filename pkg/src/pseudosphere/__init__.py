"""Pseudo-spherical submanifolds of R^5 and their Bianchi transformations.

The package builds two families of three-dimensional pseudo-spherical
submanifolds from reduced Gauss-Codazzi data, applies the Bianchi
transformation x -> x + dx/du1 in horospherical coordinates, and verifies
the resulting rank-2 degeneracy, curvature and null-curve geometry with
independent finite differences.
"""

from .bianchi import (
    BianchiResult,
    DistributionTriple,
    align_frame,
    beltrami_surface,
    bianchi_transform,
    distribution_triple,
    frobenius_residuals,
    holonomicity_test,
    image_surface,
    null_curve_check,
)
from .codazzi import (
    EXAMPLE1,
    EXAMPLE2,
    BuiltSurface,
    CodazziSolution,
    SurfaceSpec,
    build_surface,
    default_spec,
    integrate_frame,
    prescribed_metric,
    reduced_residuals,
    solve_codazzi,
)
from .errors import PseudosphereError
from .fieldcalc import (
    Grid2,
    Grid3,
    ImmersionField,
    ScalarField,
    VectorField,
    affine_span_dim,
    rank_profile,
)
from . import lift
from .lift import (
    LiftedSubmanifold,
    lift_metric_reference,
    normal_frame_reference,
    polar_to_cartesian_chart,
    reference_forms,
    u_chart_immersion,
)
from .verify import (
    Tolerances,
    VerificationReport,
    sweep_image_curvature,
    verify_case_identification,
    verify_example,
)
from .verify import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
