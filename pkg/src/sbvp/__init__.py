"""Adaptive multiple shooting for multi-point boundary value problems in
Stratonovich SDEs, with finite-difference and shooting baselines."""

from .adaptive_mesh import MonitorSpec, ShootingMesh, build_global_mesh, select_shooting_points
from .fdm import LinearOperatorSpec, solve_fd
from .initial_guess import ThetaTrajectory, solve_coarse_em, theta_at
from .newton import NewtonConfig, damped_newton
from .paths import BaseMesh, WienerPath, generate_path
from .problems import MultiPointBC, SbvpProblem, make_problem
from .shooting import SolutionPath, solve

__version__ = "0.1.0"

__all__ = [
    "BaseMesh", "LinearOperatorSpec", "MonitorSpec", "MultiPointBC", "NewtonConfig",
    "SbvpProblem", "ShootingMesh", "SolutionPath", "ThetaTrajectory", "WienerPath",
    "build_global_mesh", "damped_newton", "generate_path", "make_problem",
    "select_shooting_points", "solve", "solve_coarse_em", "solve_fd", "theta_at",
]
