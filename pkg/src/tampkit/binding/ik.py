"""Inverse kinematics for the planar arm.

Damped-least-squares Newton iteration on the end-effector task (x, z, tool
angle), tried from a coarse seed grid. Returns None when no joint-limit
respecting solution reaches the target; callers treat that as an infeasible
edge, not a fault.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..dynamics.backend import kernels
from ..dynamics.models import MODE_FREE, ArmModel, ContactSpec, SystemModel

_DAMPING = 1e-3
_MAX_ITERS = 100


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def _task_error(pose, ee):
    e = pose - ee
    e[2] = _wrap(e[2])
    return e


def seed_grid(arm: ArmModel, per_joint: int = 3) -> list[np.ndarray]:
    lo = np.asarray(arm.q_lo)
    hi = np.asarray(arm.q_hi)
    levels = [np.linspace(l + 0.1 * (h - l), h - 0.1 * (h - l), per_joint)
              for l, h in zip(lo, hi)]
    return [np.array(c) for c in itertools.product(*levels)]


def inverse_kinematics(pose, arm: ArmModel, q_seed=None, tol: float = 1e-6):
    """Joint configuration reaching the task pose, or None if unreachable."""
    pose = np.asarray(pose, dtype=float)
    if np.hypot(pose[0], pose[1]) > arm.reach:
        return None
    ip, fp = SystemModel(arm, None, ContactSpec(MODE_FREE)).pack()
    lo = np.asarray(arm.q_lo)
    hi = np.asarray(arm.q_hi)
    seeds = ([np.asarray(q_seed, float)] if q_seed is not None else []) + seed_grid(arm)
    eye = np.eye(3)
    for seed in seeds:
        q = np.clip(seed, lo, hi).astype(float)
        for _ in range(_MAX_ITERS):
            e = _task_error(pose, kernels.fk_ee(ip, fp, q))
            if np.abs(e).max() < tol:
                break
            J = kernels.ee_jacobian(ip, fp, q)
            dq = J.T @ np.linalg.solve(J @ J.T + _DAMPING * eye, e)
            step = np.linalg.norm(dq)
            if step > 0.5:
                dq *= 0.5 / step
            q = np.clip(q + dq, lo, hi)
        e = _task_error(pose, kernels.fk_ee(ip, fp, q))
        if np.abs(e).max() < tol:
            return q
    return None
