"""Segregated multi-pulse states of systems of coupled cubic fields."""
from .assignment import Assignment, build_assignment, bump_of_pair, pulses_of
from .diagnostics import (
    DiagnosticsReport,
    build_report,
    d_sigma_distance,
    membership,
    overlap_report,
    residual_max,
    sweep_row,
    write_sweep_csv,
)
from .errors import (
    AdjacentRepeat,
    BracketingFailure,
    ConfigError,
    DegeneratePulse,
    EmptyAnnulus,
    LeftNeighborhood,
    MaximizerFailure,
    NegativityPersistent,
    NewtonDivergence,
    NonConvergence,
    NotSurjective,
    SolveError,
    StageFailure,
    StepFailure,
    UnboundedEnergy,
    ZeroField,
)
from .grid import (
    RadialField,
    RadialGrid,
    build_grid,
    h1_inner,
    h1_norm_sq,
    lp_integral,
)
from .nehari import (
    LambdaVector,
    MaximizerReport,
    PulseEnsemble,
    coupled_energy,
    grad_phi,
    hess_phi,
    j_beta,
    maximize_phi,
    miranda_box,
    phi,
)
from .scalar import (
    NodalProfile,
    ShotResult,
    annulus_ground_state,
    bump_constants,
    compute_c_infinity,
    count_sign_changes,
    find_nodal_solution,
    free_energy,
    nehari_project_scalar,
    shoot,
)
from .solver import (
    SolutionRecord,
    SolverConfig,
    component_centers,
    continuation,
    coupled_newton,
    initial_guess,
    minimize_m_beta,
    newton_refine,
    pulse_distance,
    residual_components,
    split_components,
)

__all__ = [
    "Assignment",
    "AdjacentRepeat",
    "BracketingFailure",
    "ConfigError",
    "DegeneratePulse",
    "DiagnosticsReport",
    "EmptyAnnulus",
    "LambdaVector",
    "LeftNeighborhood",
    "MaximizerFailure",
    "MaximizerReport",
    "NegativityPersistent",
    "NewtonDivergence",
    "NodalProfile",
    "NonConvergence",
    "NotSurjective",
    "PulseEnsemble",
    "RadialField",
    "RadialGrid",
    "ShotResult",
    "SolutionRecord",
    "SolveError",
    "SolverConfig",
    "StageFailure",
    "StepFailure",
    "UnboundedEnergy",
    "ZeroField",
    "annulus_ground_state",
    "build_assignment",
    "build_grid",
    "build_report",
    "bump_constants",
    "bump_of_pair",
    "compute_c_infinity",
    "component_centers",
    "continuation",
    "count_sign_changes",
    "coupled_energy",
    "coupled_newton",
    "d_sigma_distance",
    "find_nodal_solution",
    "free_energy",
    "grad_phi",
    "h1_inner",
    "h1_norm_sq",
    "hess_phi",
    "initial_guess",
    "j_beta",
    "lp_integral",
    "maximize_phi",
    "membership",
    "minimize_m_beta",
    "miranda_box",
    "nehari_project_scalar",
    "newton_refine",
    "overlap_report",
    "phi",
    "pulse_distance",
    "pulses_of",
    "residual_components",
    "split_components",
    "residual_max",
    "shoot",
    "sweep_row",
    "write_sweep_csv",
]

__version__ = "0.1.0"
