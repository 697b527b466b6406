"""Steklov spectra of surfaces with cylindrical or collar ends, and their explicit bounds."""

__version__ = "0.1.0"

from .surface import (  # noqa: E402
    FlatCylinder,
    HyperbolicCollar,
    HyperbolicNeck,
    RevolutionProfile,
    ThinNeckComposite,
    build_surface,
    geometric_data,
    triangulate,
)
from .fem import assemble_boundary_mass, assemble_stiffness  # noqa: E402
from .dtn_eigen import dtn_matrix, mixed_spectrum, steklov_spectrum  # noqa: E402
from .spectra import (  # noqa: E402
    collar_mixed,
    collar_test_energy,
    collar_width,
    cylinder_mixed,
    cylinder_steklov,
    rho,
)
from .cheeger import cheeger_estimate, level_set_sweep  # noqa: E402
from .bounds import (  # noqa: E402
    bound_curvature,
    bound_hyperbolic,
    bound_length,
    hyperbolic_constants,
    sandwich_bounds,
)

__all__ = [
    "FlatCylinder",
    "HyperbolicCollar",
    "HyperbolicNeck",
    "RevolutionProfile",
    "ThinNeckComposite",
    "build_surface",
    "geometric_data",
    "triangulate",
    "assemble_boundary_mass",
    "assemble_stiffness",
    "dtn_matrix",
    "mixed_spectrum",
    "steklov_spectrum",
    "collar_mixed",
    "collar_test_energy",
    "collar_width",
    "cylinder_mixed",
    "cylinder_steklov",
    "rho",
    "cheeger_estimate",
    "level_set_sweep",
    "bound_curvature",
    "bound_hyperbolic",
    "bound_length",
    "hyperbolic_constants",
    "sandwich_bounds",
]
