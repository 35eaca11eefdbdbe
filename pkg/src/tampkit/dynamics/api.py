"""Public dynamics operations over a SystemModel.

Thin wrappers over the selected kernel backend that add dimension checks and
map kernel failures onto the toolkit's exception types.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, SingularContactInertia
from ._kernels_py import SingularKernelError, _contact_terms
from .backend import kernels
from .models import MODE_FREE, SystemModel


def _check(model: SystemModel, q=None, x=None, u=None):
    if q is not None and len(q) != model.nq:
        raise DimensionMismatch(f"q has length {len(q)}, mode needs {model.nq}")
    if x is not None and len(x) != model.nx:
        raise DimensionMismatch(f"x has length {len(x)}, mode needs {model.nx}")
    if u is not None and len(u) != model.nu:
        raise DimensionMismatch(f"u has length {len(u)}, arm has {model.nu} joints")


def mass_matrix(model: SystemModel, q) -> np.ndarray:
    """Symmetric positive-definite mass matrix, block-diagonal across object and arm."""
    q = np.asarray(q, dtype=float)
    _check(model, q=q)
    ip, fp = model.pack()
    n = model.arm.n
    if model.contact.mode == MODE_FREE:
        M, _ = kernels.arm_mass_bias(ip, fp, q, np.zeros(n))
        return np.asarray(M)
    Mr, _ = kernels.arm_mass_bias(ip, fp, q[3:], np.zeros(n))
    M = np.zeros((model.nq, model.nq))
    M[0, 0] = M[1, 1] = model.obj.mass
    M[2, 2] = model.obj.inertia
    M[3:, 3:] = Mr
    return M


def bias(model: SystemModel, q, qdot) -> np.ndarray:
    """Centrifugal + Coriolis + gravity generalized forces (left-hand-side sign)."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    _check(model, q=q)
    if len(qdot) != model.nq:
        raise DimensionMismatch("qdot length mismatch")
    ip, fp = model.pack()
    if model.contact.mode == MODE_FREE:
        _, C = kernels.arm_mass_bias(ip, fp, q, qdot)
        return np.asarray(C)
    _, Cr = kernels.arm_mass_bias(ip, fp, q[3:], qdot[3:])
    mo_g = model.obj.mass * model.arm.gravity
    return np.concatenate([[0.0, mo_g, 0.0], Cr])


def gap_and_jacobian(model: SystemModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Gap function phi(q) and its analytic Jacobian for an in-contact mode."""
    if model.contact.mode == MODE_FREE:
        raise ValueError("no contact constraint in free mode")
    q = np.asarray(q, dtype=float)
    _check(model, q=q)
    ip, fp = model.pack()
    phi, J, _, _ = _contact_terms(ip, fp, q[:3], q[3:], np.zeros(model.arm.n))
    return phi, J


def contact_force(model: SystemModel, q, qdot, tau) -> np.ndarray:
    """Constraint force lambda from the holonomic contact with Baumgarte restoring term."""
    if model.contact.mode == MODE_FREE:
        raise ValueError("no contact force in free mode")
    x = np.concatenate([np.asarray(q, float), np.asarray(qdot, float)])
    _check(model, x=x, u=np.asarray(tau, float))
    return forward_dynamics(model, x, tau)[1]


def forward_dynamics(model: SystemModel, x, u) -> tuple[np.ndarray, np.ndarray]:
    """State derivative and contact force."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check(model, x=x, u=u)
    ip, fp = model.pack()
    try:
        xdot, lam = kernels.forward_dynamics(ip, fp, x, u)
    except SingularKernelError as exc:
        raise SingularContactInertia(str(exc)) from exc
    return np.asarray(xdot), np.asarray(lam)


def rk4_step(model: SystemModel, x, u, h: float) -> np.ndarray:
    """One classical Runge-Kutta step with zero-order-hold control."""
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check(model, x=x, u=u)
    ip, fp = model.pack()
    try:
        xn, _ = kernels.rk4_step(ip, fp, x, u, h)
    except SingularKernelError as exc:
        raise SingularContactInertia(str(exc)) from exc
    return np.asarray(xn)


class ManipulatorDynamics:
    """Discrete-time adapter used by the trajectory optimizer."""

    def __init__(self, model: SystemModel, h: float, backend=None):
        self.model = model
        self.h = float(h)
        self.nx = model.nx
        self.nu = model.nu
        self.nlam = model.nlam
        self._ip, self._fp = model.pack()
        self._kern = backend or kernels

    def step(self, x, u):
        xn, _ = self._kern.rk4_step(self._ip, self._fp, x, u, self.h)
        return np.asarray(xn)

    def rollout(self, x0, U):
        try:
            X, Lam = self._kern.rollout(self._ip, self._fp, np.asarray(x0, float), np.asarray(U, float), self.h)
        except SingularKernelError as exc:
            raise SingularContactInertia(str(exc)) from exc
        return np.asarray(X), np.asarray(Lam)

    def rollout_feedback(self, Xn, Un, kff, K, alpha):
        try:
            X, U, Lam = self._kern.rollout_feedback(
                self._ip, self._fp, Xn, Un, kff, K, alpha, self.h
            )
        except SingularKernelError as exc:
            raise SingularContactInertia(str(exc)) from exc
        return np.asarray(X), np.asarray(U), np.asarray(Lam)

    def linearize_traj(self, X, U, eps=1e-6):
        A, B = self._kern.linearize_traj(self._ip, self._fp, X, U, self.h, eps)
        return np.asarray(A), np.asarray(B)

    def aux_jacobian_traj(self, X, U, eps=1e-6):
        Jx, Ju = self._kern.aux_jacobian_traj(self._ip, self._fp, X, U, eps)
        return np.asarray(Jx), np.asarray(Ju)
