from .admm import AdmmConfig, ResidualRecord, admm_solve, project, residuals, write_residual_csv
from .ddp import ConsensusTargets, DdpOptions, cost_gradient, ddp_solve, rollout, total_cost
from .spec import ConstraintSets, TOSpec, Trajectory, dump_trajectory_csv, trajectory_cost

__all__ = [
    "AdmmConfig",
    "ResidualRecord",
    "admm_solve",
    "project",
    "residuals",
    "write_residual_csv",
    "ConsensusTargets",
    "DdpOptions",
    "cost_gradient",
    "ddp_solve",
    "rollout",
    "total_cost",
    "ConstraintSets",
    "TOSpec",
    "Trajectory",
    "dump_trajectory_csv",
    "trajectory_cost",
]
