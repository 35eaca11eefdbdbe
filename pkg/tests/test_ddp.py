"""Differential dynamic programming against closed-form linear-quadratic oracles."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import integrator_spec
from tampkit.dynamics.api import ManipulatorDynamics
from tampkit.trajopt.ddp import (
    ConsensusTargets,
    DdpOptions,
    cost_gradient,
    ddp_solve,
    rollout,
    total_cost,
)
from tampkit.trajopt.spec import trajectory_cost

# exact discretization of the double integrator under RK4 + zero-order hold
def integrator_discrete(h):
    Ad = np.array([[1.0, h], [0.0, 1.0]])
    Bd = np.array([[0.5 * h * h], [h]])
    return Ad, Bd


def riccati_controls(spec):
    """Finite-horizon discrete LQR optimal open-loop controls for x_goal = 0."""
    Ad, Bd = integrator_discrete(spec.h)
    Q = np.diag(spec.Q)
    R = np.diag(spec.R)
    P = np.diag(spec.Qf)
    K = []
    for _ in range(spec.N - 1):
        S = R + Bd.T @ P @ Bd
        Kk = np.linalg.solve(S, Bd.T @ P @ Ad)
        P = Q + Ad.T @ P @ (Ad - Bd @ Kk)
        K.append(Kk)
    K.reverse()
    x = np.asarray(spec.x_init, float)
    U = np.zeros((spec.N - 1, 1))
    for i in range(spec.N - 1):
        U[i] = -K[i] @ x
        x = Ad @ x + Bd @ U[i]
    return U


@pytest.fixture(scope="module")
def lqr():
    spec = integrator_spec(N=50)
    dyn = ManipulatorDynamics(spec.model, spec.h)
    return spec, dyn


def test_ddp_matches_riccati(lqr):
    spec, dyn = lqr
    init = rollout(spec, dyn, np.zeros((spec.N - 1, 1)))
    out = ddp_solve(spec, dyn, init)
    U_star = riccati_controls(spec)
    assert np.abs(out.U - U_star).max() <= 1e-6


def test_one_iteration_solves_lqr(lqr):
    spec, dyn = lqr
    init = rollout(spec, dyn, np.zeros((spec.N - 1, 1)))
    out = ddp_solve(spec, dyn, init, opts=DdpOptions(max_iters=1))
    # quadratic problem: a single full Newton step lands on the optimum up to
    # the initial Levenberg regularization (1e-6 added to a ~0.1-scale Quu)
    assert np.abs(out.U - riccati_controls(spec)).max() <= 1e-4


def test_optimal_init_is_fixed_point(lqr):
    spec, dyn = lqr
    opt = rollout(spec, dyn, riccati_controls(spec))
    out = ddp_solve(spec, dyn, opt)
    assert out.cost <= opt.cost
    assert abs(out.cost - opt.cost) <= 1e-9 * max(1.0, abs(opt.cost))


def test_consensus_targets_inactive_at_zero_rho(lqr):
    spec, dyn = lqr
    rng = np.random.default_rng(3)
    init = rollout(spec, dyn, rng.normal(0.0, 0.1, (spec.N - 1, 1)))
    plain = ddp_solve(spec, dyn, init.copy())
    targets = ConsensusTargets(rng.normal(size=(spec.N, 2)),
                               rng.normal(size=(spec.N - 1, 1)),
                               np.zeros((spec.N - 1, 0)), 0.0, 0.0)
    with_targets = ddp_solve(spec, dyn, init.copy(), targets=targets)
    np.testing.assert_array_equal(plain.U, with_targets.U)


def test_cost_never_exceeds_init(lqr):
    spec, dyn = lqr
    rng = np.random.default_rng(4)
    for _ in range(5):
        init = rollout(spec, dyn, rng.normal(0.0, 0.5, (spec.N - 1, 1)))
        out = ddp_solve(spec, dyn, init)
        assert out.cost <= init.cost + 1e-12


def test_rollout_cost_self_consistency(lqr):
    spec, dyn = lqr
    rng = np.random.default_rng(5)
    U = rng.normal(0.0, 0.3, (spec.N - 1, 1))
    traj = rollout(spec, dyn, U)
    assert traj.cost == pytest.approx(trajectory_cost(spec, traj.X, traj.U),
                                      rel=1e-12)
    out = ddp_solve(spec, dyn, traj)
    redo = rollout(spec, dyn, out.U)
    assert redo.cost == pytest.approx(out.cost, rel=1e-9)


def test_rollout_is_dynamically_consistent(lqr):
    spec, dyn = lqr
    rng = np.random.default_rng(6)
    traj = rollout(spec, dyn, rng.normal(0.0, 0.3, (spec.N - 1, 1)))
    for i in range(spec.N - 1):
        np.testing.assert_allclose(traj.X[i + 1], dyn.step(traj.X[i], traj.U[i]),
                                   rtol=1e-12)


def test_gradient_matches_finite_differences():
    spec = integrator_spec(N=8)
    dyn = ManipulatorDynamics(spec.model, spec.h)
    rng = np.random.default_rng(7)
    U = rng.normal(0.0, 0.3, (spec.N - 1, 1))
    traj = rollout(spec, dyn, U)
    grad = cost_gradient(spec, dyn, traj.X, traj.U, None)
    eps = 1e-6
    for i in range(spec.N - 1):
        up, dn = U.copy(), U.copy()
        up[i] += eps
        dn[i] -= eps
        fd = (rollout(spec, dyn, up).cost - rollout(spec, dyn, dn).cost) / (2 * eps)
        assert grad[i, 0] == pytest.approx(fd, rel=1e-4, abs=1e-8)
