"""Douglas-Rachford splitting for box-constrained linear-quadratic optimal
control: trajectory-space proximal iterations with an exact-shooting
projection onto the dynamics, costate recovery, optimality verification,
and a direct-transcription baseline."""

from .affine import (
    AffineProjector,
    ShootingWorkspace,
    integrate_hamiltonian,
    project_affine,
)
from .duals import (
    JunctionPoint,
    JunctionSide,
    detect_junctions,
    recover_costate,
    recover_multipliers,
)
from .errors import (
    GridTooCoarse,
    InfeasibleDiscretization,
    IterationLimit,
    NoUsableJunction,
    NonFiniteState,
    NonIncreasingInterval,
    ParseError,
    ShapeMismatch,
    SingularShootingJacobian,
    UnsupportedActiveSet,
    ValidationError,
)
from .kkt import adjoint_residual, complementarity_residual, control_law_residual
from .model import (
    CostateTrajectory,
    MultiplierPair,
    ProblemSpec,
    TimeGrid,
    TrajectoryPair,
    build_grid,
    linf_distance,
    trapezoid_objective,
)
from .oracle import solve_discretized_qp
from .problems import builtin_problem, load_problem_config, serialize_problem_config
from .prox import ProxParameters, prox_f
from .solver import DrSettings, SolveReport, Termination, dr_solve, dr_step

__all__ = [
    "AffineProjector",
    "CostateTrajectory",
    "DrSettings",
    "GridTooCoarse",
    "InfeasibleDiscretization",
    "IterationLimit",
    "JunctionPoint",
    "JunctionSide",
    "MultiplierPair",
    "NoUsableJunction",
    "NonFiniteState",
    "NonIncreasingInterval",
    "ParseError",
    "ProblemSpec",
    "ProxParameters",
    "ShapeMismatch",
    "ShootingWorkspace",
    "SingularShootingJacobian",
    "SolveReport",
    "Termination",
    "TimeGrid",
    "TrajectoryPair",
    "UnsupportedActiveSet",
    "ValidationError",
    "adjoint_residual",
    "build_grid",
    "builtin_problem",
    "complementarity_residual",
    "control_law_residual",
    "detect_junctions",
    "dr_solve",
    "dr_step",
    "integrate_hamiltonian",
    "linf_distance",
    "load_problem_config",
    "project_affine",
    "prox_f",
    "recover_costate",
    "recover_multipliers",
    "serialize_problem_config",
    "solve_discretized_qp",
    "trapezoid_objective",
]

__version__ = "0.1.0"
