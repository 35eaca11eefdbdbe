"""Translate ground symbolic actions into trajectory-optimization problems.

A bound action carries the full low-level problem for one plan edge: dynamics
mode, boundary states, constraint sets, and cost weights, plus the scene
bookkeeping applied once the segment is solved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..dynamics.backend import kernels
from ..dynamics.models import (
    MODE_FREE,
    MODE_GRASP,
    MODE_PUSH,
    ContactSpec,
    SystemModel,
)
from ..errors import Infeasible, UnknownAction
from ..trajopt.spec import ConstraintSets, TOSpec
from .geometry import geometric_query, push_direction
from .ik import inverse_kinematics
from .scene import Scene

GRASP_ACTIONS = ("grasp-top", "grasp-side", "grasp-top-unblock", "grasp-side-unblock")
MOVE_ACTIONS = ("move-top", "move-side", "move-push")


@dataclass(frozen=True)
class ActionProfile:
    """Horizon, weights, and velocity box per action family."""

    N: int = 100
    h: float = 0.01
    base_cost: float = 1.0
    w_q: float = 0.1
    w_qd: float = 0.01
    w_u: float = 1e-3
    wf: float = 1e4
    vel_scale: float = 1.0


DEFAULT_PROFILES: dict[str, ActionProfile] = {
    "move-top": ActionProfile(),
    "move-side": ActionProfile(),
    "move-push": ActionProfile(),
    "grasp-top": ActionProfile(N=40, base_cost=1.0),
    "grasp-side": ActionProfile(N=40, base_cost=2.0),
    "grasp-top-unblock": ActionProfile(N=40, base_cost=1.0),
    "grasp-side-unblock": ActionProfile(N=40, base_cost=2.0),
    "release": ActionProfile(N=200),  # carries travel farthest; keep qd in box
    # slow quasi-static push: long horizon keeps joint speeds inside the
    # tightened velocity box over table-length travel
    "push": ActionProfile(N=200, base_cost=3.0, vel_scale=0.3),
    # wind-up plus release: long enough to reconfigure before the snap
    "throw": ActionProfile(N=200, base_cost=4.0),
}


@dataclass
class BoundAction:
    """A ground action with its continuous problem attached."""

    action: object  # GroundAction
    spec: TOSpec
    mode: int
    obj_name: str | None  # manipulated object, if any
    target_pose: np.ndarray
    release_vel: np.ndarray | None
    profile: ActionProfile


def grasped_object(scene: Scene) -> str | None:
    for name, o in scene.objects.items():
        if o.attached:
            return name
    return None


def manipulated_object(action) -> str | None:
    """The object whose state the action changes (the grasped one for unblocks)."""
    name = action.name
    if name in ("grasp-top-unblock", "grasp-side-unblock"):
        return action.args[2]
    if name in GRASP_ACTIONS or name in ("release", "push", "throw"):
        return action.args[1]
    return None


def _attach_pose(ip, fp, q, dtheta):
    ee = kernels.fk_ee(ip, fp, q)
    return np.array([ee[0], ee[1], ee[2] - dtheta])


def _limits(model: SystemModel, profile: ActionProfile) -> ConstraintSets:
    arm = model.arm
    n = arm.n
    nq, nlam = model.nq, model.nlam
    x_lo = np.full(2 * nq, -np.inf)
    x_hi = np.full(2 * nq, np.inf)
    off = nq - n  # object DOFs precede arm DOFs in contact modes
    x_lo[off:off + n] = arm.q_lo
    x_hi[off:off + n] = arm.q_hi
    qd = np.asarray(arm.qd_max) * profile.vel_scale
    x_lo[nq + off:nq + off + n] = -qd
    x_hi[nq + off:nq + off + n] = qd
    lam_lo = np.full(nlam, -np.inf)
    lam_hi = np.full(nlam, np.inf)
    if model.contact.mode == MODE_PUSH:
        lam_lo[0] = 0.0  # unilateral normal contact
    return ConstraintSets(x_lo, x_hi, -np.asarray(arm.tau_max),
                          np.asarray(arm.tau_max), lam_lo, lam_hi)


def _weights(model: SystemModel, profile: ActionProfile, terminal_vel: bool = True):
    nq = model.nq
    n = model.arm.n
    off = nq - n
    Q = np.zeros(2 * nq)
    Q[off:off + n] = profile.w_q
    Q[nq + off:] = profile.w_qd  # damp object velocities too in contact modes
    R = np.full(n, profile.w_u)
    Qf = np.full(2 * nq, profile.wf)
    if not terminal_vel:
        Qf[nq:] = profile.wf * 0.01
    return Q, R, Qf


def _best_release_config(pose, release_vel, arm, q_seed):
    """IK branch whose least-norm joint rates for the release velocity are
    slowest; branches that respect the velocity box are otherwise ranked by
    distance to the seed only through the rate criterion's tie structure."""
    from .ik import seed_grid

    free_ip, free_fp = SystemModel(arm, None, ContactSpec(MODE_FREE)).pack()
    best, best_rate = None, np.inf
    for seed in [np.asarray(q_seed, float)] + seed_grid(arm):
        q = inverse_kinematics(pose, arm, q_seed=seed)
        if q is None:
            continue
        if best is not None and np.allclose(q, best, atol=1e-4):
            continue
        J = kernels.ee_jacobian(free_ip, free_fp, q)[:2]
        qd = np.linalg.pinv(J) @ release_vel[:2]
        rate = float(np.abs(qd / np.asarray(arm.qd_max)).max())
        if rate < best_rate:
            best, best_rate = q, rate
    return best


def bind_action(action, state, scene: Scene, arm_state, base_model: SystemModel,
                profiles: dict[str, ActionProfile] | None = None) -> BoundAction:
    """Build the trajectory problem for one ground action.

    ``arm_state`` is the (q, qd) continuous arm state inherited from the
    previous segment; raises Infeasible when inverse kinematics finds no
    joint-limit-respecting configuration for the action's target pose.
    """
    profiles = profiles or DEFAULT_PROFILES
    name = action.name
    if name not in profiles:
        raise UnknownAction(name)
    profile = profiles[name]
    arm = scene.arm
    n = arm.n
    q0 = np.asarray(arm_state[:n], float)
    qd0 = np.asarray(arm_state[n:], float)

    pose, release_vel = geometric_query(action, scene)
    if name == "throw":
        # among the IK branches, throw from the one needing the slowest joints
        q_goal = _best_release_config(pose, release_vel, arm, q0)
    else:
        q_goal = inverse_kinematics(pose, arm, q_seed=q0)
    if q_goal is None:
        raise Infeasible(f"no inverse-kinematics solution for {action}")

    holding = grasped_object(scene)
    free_ip, free_fp = base_model.with_mode(ContactSpec(MODE_FREE)).pack()

    if name == "push":
        obj_name = action.args[1]
        obj = scene.objects[obj_name]
        d = push_direction(scene, obj_name, action.args[3])
        contact = ContactSpec(MODE_PUSH, push_dir=d)
        model = base_model.with_mode(contact, obj.model)
        # snap the object onto the contact so the gap is zero at segment start
        ee0 = kernels.fk_ee(free_ip, free_fp, q0)
        qo0 = np.array([ee0[0] + d * obj.model.hx, obj.pose[1], obj.pose[2]])
        x_init = np.concatenate([qo0, q0, np.zeros(3), qd0])
        tgt = scene.location(action.args[3])
        tx = tgt.x if hasattr(tgt, "x") else 0.5 * (tgt.x0 + tgt.x1)
        qo_goal = np.array([tx, obj.pose[1], obj.pose[2]])
        x_goal = np.concatenate([qo_goal, q_goal, np.zeros(3 + n)])
    elif name == "throw" or name == "release" or (name in MOVE_ACTIONS and holding):
        obj_name = holding if name in MOVE_ACTIONS else action.args[1]
        if holding != obj_name:
            raise Infeasible(f"{action} requires holding {obj_name}")
        obj = scene.objects[obj_name]
        contact = ContactSpec(MODE_GRASP, grasp_dtheta=obj.grasp_dtheta)
        model = base_model.with_mode(contact, obj.model)
        ip, fp = model.pack()
        qo0 = _attach_pose(ip, fp, q0, obj.grasp_dtheta)
        J0 = kernels.ee_jacobian(ip, fp, q0)
        qdo0 = J0 @ qd0
        x_init = np.concatenate([qo0, q0, qdo0, qd0])
        qo_goal = _attach_pose(ip, fp, q_goal, obj.grasp_dtheta)
        if name == "throw":
            # only the linear release velocity matters for the flight; the
            # least-norm solution leaves the tool spin free, which keeps the
            # joint-rate demand far below the square-solve answer
            Jg = kernels.ee_jacobian(ip, fp, q_goal)
            qd_goal = np.linalg.pinv(Jg[:2]) @ release_vel[:2]
            qdo_goal = release_vel.copy()
            qdo_goal[2] = float(np.sum(qd_goal))
        else:
            qd_goal = np.zeros(n)
            qdo_goal = np.zeros(3)
        x_goal = np.concatenate([qo_goal, q_goal, qdo_goal, qd_goal])
    else:
        obj_name = manipulated_object(action)
        contact = ContactSpec(MODE_FREE)
        model = base_model.with_mode(contact)
        x_init = np.concatenate([q0, qd0])
        x_goal = np.concatenate([q_goal, np.zeros(n)])

    Q, R, Qf = _weights(model, profile)
    spec = TOSpec(model=model, N=profile.N, h=profile.h, x_init=x_init,
                  x_goal=x_goal, Q=Q, R=R, Qf=Qf, limits=_limits(model, profile),
                  action=name)
    return BoundAction(action, spec, model.contact.mode, obj_name, pose,
                       release_vel, profile)


def _quintic_path(q0, v0, q1, v1, T, t):
    """Per-joint quintic with zero boundary accelerations; (Q, Qd, Qdd)."""
    A = np.array([
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 2, 0, 0, 0],
        [1, T, T ** 2, T ** 3, T ** 4, T ** 5],
        [0, 1, 2 * T, 3 * T ** 2, 4 * T ** 3, 5 * T ** 4],
        [0, 0, 2, 6 * T, 12 * T ** 2, 20 * T ** 3],
    ])
    z = np.zeros_like(q0)
    C = np.linalg.solve(A, np.stack([q0, v0, z, q1, v1, z]))
    one = np.ones_like(t)
    zero = np.zeros_like(t)
    P = np.stack([one, t, t ** 2, t ** 3, t ** 4, t ** 5], axis=1)
    D = np.stack([zero, one, 2 * t, 3 * t ** 2, 4 * t ** 3, 5 * t ** 4], axis=1)
    DD = np.stack([zero, zero, 2 * one, 6 * t, 12 * t ** 2, 20 * t ** 3], axis=1)
    return P @ C, D @ C, DD @ C


def feedforward_controls(bound: BoundAction) -> np.ndarray:
    """Inverse-dynamics warm-start torques for the bound segment.

    The unstable arm (and carried or pushed object) diverges quickly under
    noise-only open-loop controls on long horizons, so every mode gets a
    quasi-static reference: a joint-space quintic between the boundary
    states (push instead interpolates the object and follows it with
    inverse-kinematics continuation), with torques from inverse dynamics
    plus the contact-force share. Falls back to zeros if the push
    continuation leaves the reachable workspace.
    """
    spec = bound.spec
    model = spec.model
    arm = model.arm
    n = arm.n
    nq = model.nq
    N, h = spec.N, spec.h
    T = (N - 1) * h
    t = np.arange(N) * h
    U = np.zeros((N - 1, n))
    free_ip, free_fp = model.with_mode(ContactSpec(MODE_FREE)).pack()

    if model.contact.mode == MODE_PUSH:
        d = model.contact.push_dir
        mu = model.contact.mu
        mo = model.obj.mass
        g = arm.gravity
        hx = model.obj.hx
        tau = t / T
        s = 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5
        sdd = (60 * tau - 180 * tau ** 2 + 120 * tau ** 3) / T ** 2
        span = spec.x_goal[0] - spec.x_init[0]
        obj_acc = span * sdd
        ee_x = spec.x_init[0] + span * s - d * hx
        z = spec.x_init[1]
        Q = np.empty((N, n))
        q_prev = np.asarray(spec.x_init[3:3 + n], float)
        for i in range(N):
            q = inverse_kinematics(np.array([ee_x[i], z, 0.0]), arm, q_seed=q_prev)
            if q is None:
                return U
            Q[i], q_prev = q, q
        Qd = np.gradient(Q, h, axis=0)
        Qdd = np.gradient(Qd, h, axis=0)
        lam = mo * obj_acc / d + mu * mo * g  # friction opposes the push
        extra = np.zeros((N - 1, n))
        for i in range(N - 1):
            Jx = kernels.ee_jacobian(free_ip, free_fp, Q[i])[0]
            extra[i] = d * lam[i] * Jx
    else:
        off = nq - n
        q0 = np.asarray(spec.x_init[off:off + n], float)
        v0 = np.asarray(spec.x_init[nq + off:], float)
        q1 = np.asarray(spec.x_goal[off:off + n], float)
        v1 = np.asarray(spec.x_goal[nq + off:], float)
        Q, Qd, Qdd = _quintic_path(q0, v0, q1, v1, T, t)
        extra = np.zeros((N - 1, n))
        if model.contact.mode == MODE_GRASP:
            # grasp carry: the object rides the end effector; its inertial
            # load and weight come back through the full task Jacobian
            mo, io, g = model.obj.mass, model.obj.inertia, arm.gravity
            Mo = np.diag([mo, mo, io])
            weight = np.array([0.0, mo * g, 0.0])
            Qdo = np.empty((N, 3))
            for i in range(N):
                Qdo[i] = kernels.ee_jacobian(free_ip, free_fp, Q[i]) @ Qd[i]
            Qddo = np.gradient(Qdo, h, axis=0)
            for i in range(N - 1):
                J = kernels.ee_jacobian(free_ip, free_fp, Q[i])
                lam = -(Mo @ Qddo[i] + weight)
                extra[i] = -J.T @ lam

    # open-loop inverse-dynamics torques drift exponentially on long
    # horizons, so record computed-torque controls along a stabilized
    # rollout instead: the full mass matrix at the current state turns the
    # tracking error into critically damped second-order dynamics, and the
    # recorded controls replayed open-loop reproduce the rollout exactly
    ip, fp = model.pack()
    wn, zeta = 20.0, 1.0
    off = nq - n
    x = np.asarray(spec.x_init, float).copy()
    for i in range(N - 1):
        qa = x[off:off + n]
        qda = x[nq + off:]
        M, C = kernels.arm_mass_bias(free_ip, free_fp, qa, qda)
        acc = (Qdd[i] + wn * wn * (Q[i] - qa)
               + 2.0 * zeta * wn * (Qd[i] - qda))
        U[i] = M @ acc + C + extra[i]
        x, _ = kernels.rk4_step(ip, fp, x, U[i], h)
    return U


def bind(action, state, scene: Scene, arm_state, base_model: SystemModel,
         profiles=None) -> TOSpec:
    """Convenience wrapper returning just the trajectory problem."""
    return bind_action(action, state, scene, arm_state, base_model, profiles).spec


def arm_substate(bound: BoundAction, x) -> np.ndarray:
    """Extract the (q, qd) arm state from a segment state of the bound mode."""
    n = bound.spec.model.arm.n
    nq = bound.spec.model.nq
    off = nq - n
    return np.concatenate([x[off:off + n], x[nq + off:]])


def update_scene(bound: BoundAction, scene: Scene, x_terminal) -> Scene:
    """Scene after executing a solved segment: attachments and object placements."""
    out = scene.copy()
    name = bound.action.name
    n = scene.arm.n
    nq = bound.spec.model.nq
    if name in GRASP_ACTIONS:
        obj = out.objects[bound.obj_name]
        ip, fp = bound.spec.model.pack()
        q = x_terminal[:n]
        ee = kernels.fk_ee(ip, fp, q)
        obj.attached = True
        obj.grasp_dtheta = float(ee[2] - obj.pose[2])
    elif name in ("release", "throw"):
        obj = out.objects[bound.obj_name]
        b = out.bins[bound.action.args[2]]
        obj.attached = False
        obj.pose = np.array([b.x, b.z, 0.0])
    elif name == "push":
        obj = out.objects[bound.obj_name]
        obj.pose = np.asarray(x_terminal[:3], float).copy()
    elif bound.mode == MODE_GRASP:  # carrying move
        obj = out.objects[bound.obj_name]
        obj.pose = np.asarray(x_terminal[:3], float).copy()
    return out


def switch_clearance(bound: BoundAction, scene: Scene, x_terminal) -> float:
    """Approach-clearance inequality at the segment end (nonpositive means ok).

    The end effector must stay at or above the grasp point's surface by the
    object half-height during grasp approaches.
    """
    if bound.action.name not in GRASP_ACTIONS:
        return 0.0
    obj = scene.objects[bound.obj_name]
    ip, fp = bound.spec.model.pack()
    ee = kernels.fk_ee(ip, fp, x_terminal[:scene.arm.n])
    floor = obj.pose[1] - obj.model.hz
    return float(floor - ee[1])
