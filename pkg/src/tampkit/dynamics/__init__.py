from .api import (
    ManipulatorDynamics,
    bias,
    contact_force,
    forward_dynamics,
    gap_and_jacobian,
    mass_matrix,
    rk4_step,
)
from .backend import BACKEND_NAME, get_backend
from .models import (
    MODE_FREE,
    MODE_GRASP,
    MODE_PUSH,
    ArmModel,
    ContactSpec,
    ObjectModel,
    SystemModel,
)

__all__ = [
    "ManipulatorDynamics",
    "bias",
    "contact_force",
    "forward_dynamics",
    "gap_and_jacobian",
    "mass_matrix",
    "rk4_step",
    "BACKEND_NAME",
    "get_backend",
    "MODE_FREE",
    "MODE_GRASP",
    "MODE_PUSH",
    "ArmModel",
    "ContactSpec",
    "ObjectModel",
    "SystemModel",
]
