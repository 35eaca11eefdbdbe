"""Geometric queries: desired end-effector pose (and release velocity) per action."""

from __future__ import annotations

import numpy as np

from ..errors import NoBallisticSolution, PushTargetInvalid, UnknownAction
from .scene import BinGeom, Scene

TOOL_DOWN = -np.pi / 2  # tool axis pointing at the table


def top_grasp_pose(scene: Scene, obj_name: str) -> np.ndarray:
    o = scene.objects[obj_name]
    return np.array([o.pose[0], o.pose[1] + o.model.hz, TOOL_DOWN])


def side_grasp_pose(scene: Scene, obj_name: str) -> np.ndarray:
    # approach from the robot side, tool horizontal
    o = scene.objects[obj_name]
    side = -1.0 if o.pose[0] >= 0 else 1.0
    return np.array([o.pose[0] + side * o.model.hx, o.pose[1], 0.0])


def push_contact_pose(scene: Scene, obj_name: str, push_dir: float) -> np.ndarray:
    o = scene.objects[obj_name]
    return np.array([o.pose[0] - push_dir * o.model.hx, o.pose[1], 0.0])


def push_direction(scene: Scene, obj_name: str, target_name: str) -> float:
    tgt = scene.location(target_name)
    tx = tgt.x if isinstance(tgt, BinGeom) else 0.5 * (tgt.x0 + tgt.x1)
    return 1.0 if tx >= scene.objects[obj_name].pose[0] else -1.0


def drop_pose(scene: Scene, obj_name: str, bin_name: str) -> np.ndarray:
    b = scene.bins[bin_name]
    hz = scene.objects[obj_name].model.hz
    return np.array([b.x, b.z + scene.drop_clearance + hz, TOOL_DOWN])


def max_ee_speed(arm) -> float:
    """Upper bound on achievable end-effector speed from the velocity box."""
    L = np.asarray(arm.lengths)
    tails = np.cumsum(L[::-1])[::-1]  # sum of link lengths from joint j outward
    return float(np.dot(np.asarray(arm.qd_max), tails))


def ballistic_release(scene: Scene, obj_name: str, bin_name: str):
    """Release pose and velocity whose free-fall arc lands at the bin centroid."""
    b = scene.bins[bin_name]
    rx, rz = scene.throw_release
    gamma = scene.throw_angle
    g = scene.arm.gravity
    dx = b.x - rx
    dz = b.z - rz
    s = 1.0 if dx >= 0 else -1.0
    adx = abs(dx)
    denom = 2.0 * np.cos(gamma) ** 2 * (adx * np.tan(gamma) - dz)
    if adx <= 0 or denom <= 0:
        raise NoBallisticSolution(
            f"no {np.degrees(gamma):.0f}-degree arc from {scene.throw_release} to bin {bin_name}"
        )
    v = float(np.sqrt(g * adx * adx / denom))
    if v > max_ee_speed(scene.arm):
        raise NoBallisticSolution(
            f"required release speed {v:.2f} m/s exceeds the arm's velocity limits"
        )
    angle = gamma if s > 0 else np.pi - gamma
    vel = np.array([s * v * np.cos(gamma), v * np.sin(gamma), 0.0])
    return np.array([rx, rz, angle]), vel


def free_fall_landing(release_pos, release_vel, target_z: float, g: float) -> float:
    """Horizontal coordinate where the projectile crosses the target height."""
    rx, rz = release_pos[0], release_pos[1]
    vx, vz = release_vel[0], release_vel[1]
    disc = vz * vz + 2.0 * g * (rz - target_z)
    if disc < 0:
        raise NoBallisticSolution("arc never reaches the target height")
    t = (vz + np.sqrt(disc)) / g
    return float(rx + vx * t)


def geometric_query(action, scene: Scene):
    """Target end-effector pose for a ground action; throws also get a velocity.

    Returns (pose, release_velocity_or_None).
    """
    name = action.name
    args = action.args
    if name in ("move-top", "grasp-top"):
        pose = top_grasp_pose(scene, args[1])
        if name == "move-top":
            pose = pose + np.array([0.0, scene.standoff, 0.0])
        return pose, None
    if name in ("move-side", "grasp-side"):
        pose = side_grasp_pose(scene, args[1])
        if name == "move-side":
            o = scene.objects[args[1]]
            side = -1.0 if o.pose[0] >= 0 else 1.0
            pose = pose + np.array([side * scene.standoff, 0.0, 0.0])
        return pose, None
    if name in ("grasp-top-unblock", "grasp-side-unblock"):
        # the grasped entity is the blocking object, third argument
        target = args[2]
        if name == "grasp-top-unblock":
            return top_grasp_pose(scene, target), None
        return side_grasp_pose(scene, target), None
    if name == "move-push":
        # stand at the face opposite the push direction toward the zone
        d = push_direction(scene, args[1], args[2])
        return push_contact_pose(scene, args[1], d), None
    if name == "push":
        d = push_direction(scene, args[1], args[3])
        tgt = scene.location(args[3])
        surf = scene.surfaces[args[2]]
        tx = tgt.x if isinstance(tgt, BinGeom) else 0.5 * (tgt.x0 + tgt.x1)
        if not surf.contains_x(tx):
            raise PushTargetInvalid(f"push target {args[3]} lies off surface {args[2]}")
        # goal pose: still in contact once the object reaches the target
        o = scene.objects[args[1]]
        return np.array([tx - d * o.model.hx, o.pose[1], 0.0]), None
    if name == "release":
        return drop_pose(scene, args[1], args[2]), None
    if name == "throw":
        return ballistic_release(scene, args[1], args[2])
    raise UnknownAction(name)
