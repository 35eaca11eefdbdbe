"""Problem containers for the trajectory optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..dynamics.models import SystemModel


@dataclass(frozen=True)
class ConstraintSets:
    """Admissible sets: per-coordinate boxes plus an optional contact cone.

    ``cone`` is (normal index, tangential index, mu) on the lambda channel;
    the normal is clamped nonnegative and the tangential ratio to mu.
    """

    x_lo: np.ndarray
    x_hi: np.ndarray
    u_lo: np.ndarray
    u_hi: np.ndarray
    lam_lo: np.ndarray
    lam_hi: np.ndarray
    cone: tuple[int, int, float] | None = None

    @staticmethod
    def unbounded(nx: int, nu: int, nlam: int) -> "ConstraintSets":
        inf = np.inf
        return ConstraintSets(
            np.full(nx, -inf), np.full(nx, inf),
            np.full(nu, -inf), np.full(nu, inf),
            np.full(nlam, -inf), np.full(nlam, inf),
        )

    def scales(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-coordinate half-ranges for residual normalization (1 where unbounded)."""
        def half_range(lo, hi):
            s = (np.asarray(hi) - np.asarray(lo)) / 2.0
            s[~np.isfinite(s)] = 1.0
            s[s == 0] = 1.0
            return s
        return half_range(self.x_lo, self.x_hi), half_range(self.u_lo, self.u_hi), \
            half_range(self.lam_lo, self.lam_hi)


@dataclass(frozen=True)
class TOSpec:
    """One trajectory-optimization segment: Bolza problem over a dynamics mode."""

    model: SystemModel
    N: int  # knot count
    h: float  # step (s)
    x_init: np.ndarray
    x_goal: np.ndarray
    Q: np.ndarray  # running state weight (diagonal)
    R: np.ndarray  # running control weight (diagonal)
    Qf: np.ndarray  # terminal state weight (diagonal)
    limits: ConstraintSets
    action: str = ""
    u_ref: np.ndarray | None = None  # nominal control the effort cost is measured from

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("horizon needs at least 2 knots")
        if self.h <= 0:
            raise ValueError("step must be positive")
        nx, nu = self.model.nx, self.model.nu
        for name, arr, dim in (
            ("x_init", self.x_init, nx), ("x_goal", self.x_goal, nx),
            ("Q", self.Q, nx), ("Qf", self.Qf, nx), ("R", self.R, nu),
        ):
            if np.asarray(arr).shape != (dim,):
                raise ValueError(f"{name} must have shape ({dim},)")
        if np.any(self.Q < 0) or np.any(self.R < 0) or np.any(self.Qf < 0):
            raise ValueError("cost weights must be nonnegative")

    def with_boundary(self, x_init, x_goal=None) -> "TOSpec":
        return replace(self, x_init=np.asarray(x_init, float),
                       x_goal=self.x_goal if x_goal is None else np.asarray(x_goal, float))


@dataclass
class Trajectory:
    """Knot-point trajectory: N states, N-1 controls, per-interval contact forces."""

    X: np.ndarray
    U: np.ndarray
    Lam: np.ndarray
    cost: float = 0.0

    @property
    def N(self) -> int:
        return self.X.shape[0]

    def copy(self) -> "Trajectory":
        return Trajectory(self.X.copy(), self.U.copy(), self.Lam.copy(), self.cost)


def stage_cost(spec: TOSpec, x, u) -> float:
    dx = x - spec.x_goal
    du = u if spec.u_ref is None else u - spec.u_ref
    return 0.5 * float(dx @ (spec.Q * dx) + du @ (spec.R * du))


def terminal_cost(spec: TOSpec, x) -> float:
    dx = x - spec.x_goal
    return 0.5 * float(dx @ (spec.Qf * dx))


def trajectory_cost(spec: TOSpec, X, U) -> float:
    """Plain objective: running + terminal quadratics, no consensus terms."""
    J = terminal_cost(spec, X[-1])
    for i in range(U.shape[0]):
        J += stage_cost(spec, X[i], U[i])
    return J


def dump_trajectory_csv(spec: TOSpec, traj: Trajectory, path) -> None:
    """CSV dump with header t,q...,qdot...,tau...,lambda...."""
    nq = spec.model.nq
    nu, nlam = spec.model.nu, spec.model.nlam
    header = (
        ["t"]
        + [f"q{i}" for i in range(nq)]
        + [f"qdot{i}" for i in range(nq)]
        + [f"tau{i}" for i in range(nu)]
        + [f"lambda{i}" for i in range(nlam)]
    )
    rows = []
    for i in range(traj.N):
        u = traj.U[i] if i < traj.N - 1 else np.zeros(nu)
        lam = traj.Lam[i] if i < traj.N - 1 and traj.Lam.size else np.zeros(nlam)
        rows.append(np.concatenate([[i * spec.h], traj.X[i], u, lam]))
    data = np.array(rows)
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="",
               fmt="%.10g")
