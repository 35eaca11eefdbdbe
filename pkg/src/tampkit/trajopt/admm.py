"""Consensus operator-splitting wrapper around the iLQR block.

The primal block re-solves the smooth subproblem with quadratic pull terms
toward the projected copies; the projection block clamps a trajectory copy
onto the admissible boxes and contact cone; scaled duals accumulate the
consensus gap. Stage 1 skips all of that and runs a single unconstrained
solve, which is the cheap edge-costing mode used during search.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..dynamics.api import ManipulatorDynamics
from ..errors import Infeasible
from .ddp import ConsensusTargets, DdpOptions, ddp_solve, total_cost
from .spec import ConstraintSets, TOSpec, Trajectory


@dataclass
class AdmmConfig:
    # small consensus penalties keep the projected copies from limit-cycling
    # on long carry segments while the primal block tracks unstable dynamics
    rho_j: float = 0.1
    rho_u: float = 0.02
    eps_x: float = 1e-3
    eps_u: float = 1e-3
    eps_dual_factor: float = 1.0
    max_iters: int = 200
    stage: int = 2
    k_stall: int = 20
    stall_fraction: float = 0.01  # minimum relative residual improvement per window
    ddp_iters: int = 10  # inner solver iterations per outer iteration
    ddp_opts: DdpOptions = field(default_factory=DdpOptions)

    def __post_init__(self):
        if self.stage not in (1, 2):
            raise ValueError("stage must be 1 or 2")
        if self.stage == 2 and (self.rho_j <= 0 or self.rho_u <= 0):
            raise ValueError("stage 2 needs positive penalty parameters")
        if self.eps_x <= 0 or self.eps_u <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class ResidualRecord:
    """Normalized consensus residuals for one outer iteration.

    r_x aggregates the state-channel categories in quadrature:
    r_x^2 = r_position^2 + r_velocity^2 + r_contact^2; r_u = r_torque.
    """

    iter: int
    r_x: float
    r_u: float
    r_position: float
    r_velocity: float
    r_torque: float
    r_contact: float


def _rms(d) -> float:
    return float(np.sqrt(np.mean(d ** 2))) if d.size else 0.0


def project(X, U, Lam, limits: ConstraintSets):
    """Coordinatewise Euclidean projection onto the admissible sets."""
    Xp = np.clip(X, limits.x_lo, limits.x_hi)
    Up = np.clip(U, limits.u_lo, limits.u_hi)
    Lp = np.clip(Lam, limits.lam_lo, limits.lam_hi) if Lam.size else Lam.copy()
    if limits.cone is not None and Lp.size:
        ni, ti, mu = limits.cone
        Lp[:, ni] = np.maximum(Lp[:, ni], 0.0)
        bound = mu * Lp[:, ni]
        Lp[:, ti] = np.clip(Lp[:, ti], -bound, bound)
    return Xp, Up, Lp


def residuals(spec: TOSpec, X, U, Lam, Xbar, Ubar, Lambar, it: int = 0) -> ResidualRecord:
    """RMS consensus gap per constraint category, scaled by the limit half-ranges."""
    sx, su, sl = spec.limits.scales()
    nq = spec.model.nq

    def rms(d):
        return float(np.sqrt(np.mean(d ** 2))) if d.size else 0.0

    dx = (X - Xbar) / sx
    r_pos = rms(dx[:, :nq])
    r_vel = rms(dx[:, nq:])
    r_tau = rms((U - Ubar) / su)
    r_con = rms((Lam - Lambar) / sl) if Lam.size else 0.0
    r_x = float(np.sqrt(r_pos ** 2 + r_vel ** 2 + r_con ** 2))
    return ResidualRecord(it, r_x, r_tau, r_pos, r_vel, r_tau, r_con)


def admm_solve(spec: TOSpec, dyn: ManipulatorDynamics, warm: Trajectory,
               cfg: AdmmConfig) -> tuple[Trajectory, list[ResidualRecord]]:
    """Refine a warm-start trajectory against the admissible sets.

    Stage 1: one unconstrained solve with zero penalties, empty history.
    Stage 2: alternate {augmented solve, projection, dual update} until the
    normalized residuals drop below tolerance. Raises Infeasible when the
    residuals stagnate above tolerance for a full stall window.
    """
    if cfg.stage == 1:
        opts = cfg.ddp_opts
        traj = ddp_solve(spec, dyn, warm, targets=None, opts=opts)
        return traj, []

    X, U, Lam = warm.X.copy(), warm.U.copy(), warm.Lam.copy()
    Xbar, Ubar, Lambar = project(X, U, Lam, spec.limits)
    wx = np.zeros_like(X)
    wu = np.zeros_like(U)
    wl = np.zeros_like(Lam)
    inner = DdpOptions(**{**cfg.ddp_opts.__dict__, "max_iters": cfg.ddp_iters})

    history: list[ResidualRecord] = []
    best = np.inf
    stall = 0
    traj = warm.copy()
    for it in range(1, cfg.max_iters + 1):
        Xbar_prev, Ubar_prev, Lambar_prev = Xbar, Ubar, Lambar
        targets = ConsensusTargets(Xbar - wx, Ubar - wu, Lambar - wl,
                                   cfg.rho_j, cfg.rho_u)
        traj = ddp_solve(spec, dyn, Trajectory(X, U, Lam, traj.cost),
                         targets=targets, opts=inner)
        X, U, Lam = traj.X, traj.U, traj.Lam
        Xbar, Ubar, Lambar = project(X + wx, U + wu, Lam + wl, spec.limits)
        wx = wx + X - Xbar
        wu = wu + U - Ubar
        wl = wl + Lam - Lambar

        rec = residuals(spec, X, U, Lam, Xbar, Ubar, Lambar, it)
        history.append(rec)
        # dual residual: movement of the projected copies between iterations
        sx, su, sl = spec.limits.scales()
        dual = max(
            _rms((Xbar - Xbar_prev) / sx),
            _rms((Ubar - Ubar_prev) / su),
            _rms((Lambar - Lambar_prev) / sl) if Lam.size else 0.0,
        )
        eps_dual = cfg.eps_dual_factor * max(cfg.eps_x, cfg.eps_u)
        if rec.r_x <= cfg.eps_x and rec.r_u <= cfg.eps_u and dual <= eps_dual:
            return _polish(spec, dyn, U), history

        level = max(rec.r_x / cfg.eps_x, rec.r_u / cfg.eps_u, dual / eps_dual)
        if level < best * (1.0 - cfg.stall_fraction):
            best = level
            stall = 0
        else:
            stall += 1
            if stall >= cfg.k_stall:
                raise Infeasible(
                    f"consensus residuals stagnated at {level:.3g}x tolerance "
                    f"after {it} iterations"
                )
    raise Infeasible(f"residuals above tolerance after {cfg.max_iters} iterations")


def _polish(spec: TOSpec, dyn: ManipulatorDynamics, U) -> Trajectory:
    """Final rollout of box-clamped controls so the returned controls are feasible."""
    Uc = np.clip(U, spec.limits.u_lo, spec.limits.u_hi)
    X, Lam = dyn.rollout(spec.x_init, Uc)
    return Trajectory(X, Uc, Lam, total_cost(spec, X, Uc, Lam, None))


def write_residual_csv(history: list[ResidualRecord], path) -> None:
    """Per-iteration normalized residuals: iter,r_x,r_u,r_torque,r_velocity,r_contact."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iter", "r_x", "r_u", "r_torque", "r_velocity", "r_contact"])
        for r in history:
            w.writerow([r.iter, f"{r.r_x:.10g}", f"{r.r_u:.10g}", f"{r.r_torque:.10g}",
                        f"{r.r_velocity:.10g}", f"{r.r_contact:.10g}"])
