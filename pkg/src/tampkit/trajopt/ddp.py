"""Iterative LQR solver for one trajectory segment.

Gauss-Newton variant: dynamics linearized by finite differences around the
current rollout, value function expanded to second order, backtracking line
search on the feed-forward gain. Optional consensus terms
(rho_j/2)||[x; lam] - target||^2 + (rho_u/2)||u - target||^2 make this the
primal block of the operator-splitting solver; with rho = 0 it is a plain
unconstrained solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics.api import ManipulatorDynamics
from ..errors import NonFiniteCost, NotConverged
from .spec import TOSpec, Trajectory, stage_cost, terminal_cost


@dataclass
class ConsensusTargets:
    """Pull-targets (projected copy minus dual) for the consensus penalty."""

    X: np.ndarray  # (N, nx)
    U: np.ndarray  # (N-1, nu)
    Lam: np.ndarray  # (N-1, nlam)
    rho_j: float
    rho_u: float


@dataclass
class DdpOptions:
    max_iters: int = 200
    tol: float = 1e-6
    reg_init: float = 1e-6
    reg_min: float = 1e-8
    reg_max: float = 1e8
    n_alphas: int = 11  # line search steps 1, 0.5, ..., 2^-10
    armijo: float = 1e-4
    log: bool = False


def total_cost(spec: TOSpec, X, U, Lam, targets: ConsensusTargets | None) -> float:
    J = terminal_cost(spec, X[-1])
    for i in range(U.shape[0]):
        J += stage_cost(spec, X[i], U[i])
    if targets is not None:
        J += 0.5 * targets.rho_j * float(np.sum((X - targets.X) ** 2))
        J += 0.5 * targets.rho_u * float(np.sum((U - targets.U) ** 2))
        if Lam.size:
            J += 0.5 * targets.rho_j * float(np.sum((Lam - targets.Lam) ** 2))
    return J


def rollout(spec: TOSpec, dyn: ManipulatorDynamics, U, x_init=None) -> Trajectory:
    """Open-loop rollout of a control sequence with plain (no-consensus) cost."""
    x0 = spec.x_init if x_init is None else np.asarray(x_init, float)
    X, Lam = dyn.rollout(x0, np.asarray(U, float))
    return Trajectory(X, np.asarray(U, float).copy(), Lam,
                      total_cost(spec, X, np.asarray(U, float), Lam, None))


def cost_gradient(spec: TOSpec, dyn: ManipulatorDynamics, X, U,
                  targets: ConsensusTargets | None = None) -> np.ndarray:
    """Adjoint gradient of the total cost with respect to the controls."""
    N1 = U.shape[0]
    A, B = dyn.linearize_traj(X, U)
    use_lam = targets is not None and targets.rho_j > 0 and dyn.nlam > 0
    if use_lam:
        Jx, Ju = dyn.aux_jacobian_traj(X, U)
        _, Lam = dyn.rollout(X[0], U)
    g = np.empty_like(U)
    p = spec.Qf * (X[-1] - spec.x_goal)
    if targets is not None:
        p = p + targets.rho_j * (X[-1] - targets.X[-1])
    for i in range(N1 - 1, -1, -1):
        du = U[i] if spec.u_ref is None else U[i] - spec.u_ref
        lx = spec.Q * (X[i] - spec.x_goal)
        lu = spec.R * du
        if targets is not None:
            lx = lx + targets.rho_j * (X[i] - targets.X[i])
            lu = lu + targets.rho_u * (U[i] - targets.U[i])
            if use_lam:
                r = targets.rho_j * (Lam[i] - targets.Lam[i])
                lx = lx + Jx[i].T @ r
                lu = lu + Ju[i].T @ r
        g[i] = lu + B[i].T @ p
        p = lx + A[i].T @ p
    return g


def _backward_pass(spec, A, B, X, U, Lam, targets, JxL, JuL, reg):
    """Riccati sweep; returns gains and expected-decrease coefficients or None."""
    N1 = U.shape[0]
    nx, nu = X.shape[1], U.shape[1]
    rho_j = targets.rho_j if targets is not None else 0.0
    rho_u = targets.rho_u if targets is not None else 0.0

    Vx = spec.Qf * (X[-1] - spec.x_goal)
    Vxx = np.diag(spec.Qf).astype(float)
    if targets is not None:
        Vx = Vx + rho_j * (X[-1] - targets.X[-1])
        Vxx = Vxx + rho_j * np.eye(nx)
    kff = np.empty((N1, nu))
    K = np.empty((N1, nu, nx))
    d1 = d2 = 0.0
    for i in range(N1 - 1, -1, -1):
        du = U[i] if spec.u_ref is None else U[i] - spec.u_ref
        lx = spec.Q * (X[i] - spec.x_goal)
        lu = spec.R * du
        lxx = np.diag(spec.Q).astype(float)
        luu = np.diag(spec.R).astype(float)
        lux = np.zeros((nu, nx))
        if targets is not None:
            lx = lx + rho_j * (X[i] - targets.X[i])
            lu = lu + rho_u * (U[i] - targets.U[i])
            lxx = lxx + rho_j * np.eye(nx)
            luu = luu + rho_u * np.eye(nu)
            if JxL is not None:
                r = rho_j * (Lam[i] - targets.Lam[i])
                lx = lx + JxL[i].T @ r
                lu = lu + JuL[i].T @ r
                lxx = lxx + rho_j * JxL[i].T @ JxL[i]
                luu = luu + rho_j * JuL[i].T @ JuL[i]
                lux = lux + rho_j * JuL[i].T @ JxL[i]
        Qx = lx + A[i].T @ Vx
        Qu = lu + B[i].T @ Vx
        Qxx = lxx + A[i].T @ Vxx @ A[i]
        Quu = luu + B[i].T @ Vxx @ B[i]
        Qux = lux + B[i].T @ Vxx @ A[i]
        Quu_reg = Quu + reg * np.eye(nu)
        try:
            L = np.linalg.cholesky(0.5 * (Quu_reg + Quu_reg.T))
        except np.linalg.LinAlgError:
            return None
        rhs = np.column_stack([Qu, Qux])
        sol = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
        kff[i] = -sol[:, 0]
        K[i] = -sol[:, 1:]
        d1 += float(kff[i] @ Qu)
        d2 += float(kff[i] @ Quu @ kff[i])
        Vx = Qx + K[i].T @ Quu @ kff[i] + K[i].T @ Qu + Qux.T @ kff[i]
        Vxx = Qxx + K[i].T @ Quu @ K[i] + K[i].T @ Qux + Qux.T @ K[i]
        Vxx = 0.5 * (Vxx + Vxx.T)
    return kff, K, d1, d2


def ddp_solve(spec: TOSpec, dyn: ManipulatorDynamics, init: Trajectory,
              targets: ConsensusTargets | None = None,
              opts: DdpOptions | None = None) -> Trajectory:
    """Minimize the (optionally consensus-augmented) cost from a warm start.

    Returns a dynamically consistent trajectory whose cost does not exceed the
    initial one. Raises NotConverged when the line search fails outright at
    maximum regularization; hitting the iteration cap while still improving
    returns the current iterate.
    """
    opts = opts or DdpOptions()
    if targets is not None and (targets.rho_j == 0.0 and targets.rho_u == 0.0):
        targets = None
    X, U = init.X.copy(), init.U.copy()
    Lam = init.Lam.copy()
    J = total_cost(spec, X, U, Lam, targets)
    if not np.isfinite(J):
        raise NonFiniteCost(f"initial trajectory cost is {J}")
    reg = opts.reg_init
    use_lam = targets is not None and targets.rho_j > 0 and dyn.nlam > 0
    alphas = [0.5 ** k for k in range(opts.n_alphas)]

    for it in range(opts.max_iters):
        A, B = dyn.linearize_traj(X, U)
        JxL = JuL = None
        if use_lam:
            JxL, JuL = dyn.aux_jacobian_traj(X, U)
        bp = _backward_pass(spec, A, B, X, U, Lam, targets, JxL, JuL, reg)
        while bp is None:
            reg *= 10.0
            if reg > opts.reg_max:
                raise NotConverged("backward pass failed at maximum regularization")
            bp = _backward_pass(spec, A, B, X, U, Lam, targets, JxL, JuL, reg)
        kff, K, d1, d2 = bp

        accepted = False
        for alpha in alphas:
            # overdriven rollouts may overflow; they are rejected by the finite check
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    Xn, Un, Ln = dyn.rollout_feedback(X, U, kff, K, alpha)
                    Jn = total_cost(spec, Xn, Un, Ln, targets)
            except Exception:
                continue
            if not np.isfinite(Jn):
                continue
            expected = -(alpha * d1 + 0.5 * alpha * alpha * d2)
            if expected > 0:
                ok = (J - Jn) / expected > opts.armijo
            else:
                ok = Jn < J
            if ok:
                accepted = True
                break
        if opts.log:
            print(f"iter={it} cost={J:.9g} d1={d1:.3g} reg={reg:.1g} "
                  f"step={alpha if accepted else 0}")
        if not accepted:
            reg *= 10.0
            if reg > opts.reg_max:
                if abs(d1) < opts.tol:
                    break  # stationary point, just a stiff line search
                raise NotConverged("line search failed at maximum regularization")
            continue
        decrease = J - Jn
        X, U, Lam, J = Xn, Un, Ln, Jn
        reg = max(reg * 0.5, opts.reg_min)
        if decrease < opts.tol * max(1.0, abs(J)) and abs(d1) < opts.tol:
            break
    return Trajectory(X, U, Lam, J)
