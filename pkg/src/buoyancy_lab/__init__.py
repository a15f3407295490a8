"""Flotation of convex bodies: waterlines, buoyancy centres, metacentres and
characterisation tests on exact convex polytopes."""

__version__ = "0.1.0"

from .diagnostics import (ball_limit_test, equichordal_test, floating_body, hausdorff_distance,
                          isotropy_on_equators_test, principal_moment_test)
from .dupin import check_dupin1, check_dupin2, davidov_2d_check, metacentric_radius_fd
from .estimators import BuoyancyAnalyzer, SectionMomentTransformer
from .exceptions import (CurvatureUndefinedError, DegenerateBodyError,
                         DegenerateBuoyancyLineError, DensityOutOfRangeError, EmptySectionError,
                         GeometryError, SymmetryRequiredError)
from .flotation import (FLOATS, NO, buoyancy_center, equilibrium_residual, equilibrium_scan,
                        find_waterline, sample_surface_of_centers)
from .kernel import ConvexBody, HalfSpace, centroid, clip, section, volume
from .zoo import generate

__all__ = [
    "BuoyancyAnalyzer", "ConvexBody", "CurvatureUndefinedError", "DegenerateBodyError",
    "DegenerateBuoyancyLineError", "DensityOutOfRangeError", "EmptySectionError", "FLOATS",
    "GeometryError", "HalfSpace", "NO", "SectionMomentTransformer", "SymmetryRequiredError",
    "ball_limit_test", "buoyancy_center", "centroid", "check_dupin1", "check_dupin2", "clip",
    "davidov_2d_check", "equichordal_test", "equilibrium_residual", "equilibrium_scan",
    "find_waterline", "floating_body", "generate", "hausdorff_distance",
    "isotropy_on_equators_test", "metacentric_radius_fd", "principal_moment_test",
    "sample_surface_of_centers", "section", "volume",
]
