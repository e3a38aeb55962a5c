"""Central configurations of n-body systems, their Morse and fixed-point
indices, and relative equilibria on the vertical cylinder."""

__version__ = "0.1.0"

from .cc_solver import (
    CriticalRecord,
    SolverConfig,
    census,
    centrality_residual,
    distance_signature,
    equivariance_defect,
    find_central_configuration,
    normalized_gradient_map,
    projection_inequality,
    quotient_lift_check,
    same_class,
)
from .errors import (
    CollisionError,
    ConvergenceError,
    DegenerateRecordError,
    DomainError,
    NBodyError,
    SchemaError,
    SymmetryError,
)
from .indices import (
    AdaptedFrame,
    IndexRecord,
    adapted_frame,
    fixed_point_index,
    gradient_map_jacobian,
    identity_residual,
    restricted_hessian,
    slice_dimension,
)
from .mass_geometry import (
    align_rotation,
    block_rotation_generator,
    isotropy_rank,
    mass_inner,
    mass_norm,
    normalize_to_ellipsoid,
    orbit_directions,
    project_center,
    rotation_quadratic_form,
)
from .potentials import (
    PairPotential,
    SymmetrySpec,
    apply_symmetry,
    charged,
    invariance_residuals,
    newtonian,
)
from .rel_equilibria import (
    AxisPairCharges,
    CylinderSpec,
    RelEquilibriumRecord,
    certify_axis_pair_equilibrium,
    cylinder_value,
    find_relative_equilibrium,
    integrate_newton,
    interior_max_gates,
    is_central,
    lift_axis_configuration,
    maximize_strip_potential,
    rotating_solution_drift,
    strip_gradient,
    strip_hessian,
    strip_potential,
    verify_dynamics,
)

__all__ = [name for name in dir() if not name.startswith("_")]
