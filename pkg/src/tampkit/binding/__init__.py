from .bind import (
    DEFAULT_PROFILES,
    ActionProfile,
    BoundAction,
    arm_substate,
    bind,
    bind_action,
    grasped_object,
    manipulated_object,
    switch_clearance,
    update_scene,
)
from .geometry import (
    ballistic_release,
    free_fall_landing,
    geometric_query,
    max_ee_speed,
    push_direction,
)
from .ik import inverse_kinematics
from .scene import BinGeom, ObjectState, Scene, Surface

__all__ = [
    "DEFAULT_PROFILES",
    "ActionProfile",
    "BoundAction",
    "arm_substate",
    "bind",
    "bind_action",
    "grasped_object",
    "manipulated_object",
    "switch_clearance",
    "update_scene",
    "ballistic_release",
    "free_fall_landing",
    "geometric_query",
    "max_ee_speed",
    "push_direction",
    "inverse_kinematics",
    "BinGeom",
    "ObjectState",
    "Scene",
    "Surface",
]
