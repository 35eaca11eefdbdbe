"""Rigid-body dynamics: mass matrix, bias, contact terms, integration."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_integrator_arm, make_two_link_arm
from tampkit.dynamics import api
from tampkit.dynamics.backend import get_backend
from tampkit.dynamics.models import (
    MODE_FREE,
    MODE_GRASP,
    MODE_PUSH,
    ArmModel,
    ContactSpec,
    ObjectModel,
    SystemModel,
)
from tampkit.errors import DimensionMismatch

RNG = np.random.default_rng(12345)


def free_model(arm: ArmModel) -> SystemModel:
    return SystemModel(arm, None, ContactSpec(MODE_FREE))


def grasp_model() -> SystemModel:
    arm = make_two_link_arm()
    return SystemModel(arm, ObjectModel(0.5, 0.002, 0.03, 0.04),
                       ContactSpec(MODE_GRASP))


def push_model(push_dir=1.0) -> SystemModel:
    arm = make_two_link_arm()
    return SystemModel(arm, ObjectModel(0.5, 0.002, 0.03, 0.04),
                       ContactSpec(MODE_PUSH, push_dir=push_dir, mu=0.3))


def com_heights(arm: ArmModel, q):
    th = np.cumsum(q)
    z_joint = np.concatenate([[0.0], np.cumsum(np.array(arm.lengths) * np.sin(th))])
    return np.array([z_joint[i] + arm.coms[i] * np.sin(th[i])
                     for i in range(arm.n)])


def potential(arm: ArmModel, q) -> float:
    return float(np.dot(arm.masses, com_heights(arm, q)) * arm.gravity)


def kinetic(model: SystemModel, q, qd) -> float:
    M = api.mass_matrix(model, q)
    return 0.5 * float(qd @ M @ qd)


def test_single_link_mass_constant():
    arm = ArmModel(lengths=(0.7,), masses=(2.0,), inertias=(0.05,), coms=(0.3,),
                   q_lo=(-3.0,), q_hi=(3.0,), qd_max=(10.0,), tau_max=(50.0,))
    model = free_model(arm)
    expected = 0.05 + 2.0 * 0.3 ** 2
    for q in RNG.uniform(-3, 3, (5, 1)):
        M = api.mass_matrix(model, q)
        assert M.shape == (1, 1)
        assert M[0, 0] == pytest.approx(expected, rel=1e-12)


def test_two_link_mass_matches_closed_form():
    arm = make_two_link_arm()
    model = free_model(arm)
    l1 = arm.lengths[0]
    m1, m2 = arm.masses
    i1, i2 = arm.inertias
    c1, c2 = arm.coms
    for q in RNG.uniform(-3, 3, (10, 2)):
        M = api.mass_matrix(model, q)
        cos2 = np.cos(q[1])
        m11 = i1 + i2 + m1 * c1 ** 2 + m2 * (l1 ** 2 + c2 ** 2 + 2 * l1 * c2 * cos2)
        m12 = i2 + m2 * (c2 ** 2 + l1 * c2 * cos2)
        m22 = i2 + m2 * c2 ** 2
        np.testing.assert_allclose(M, [[m11, m12], [m12, m22]], rtol=1e-10)


def test_mass_matrix_block_diagonal_in_contact_modes():
    model = grasp_model()
    for q in RNG.uniform(-2, 2, (5, model.nq)):
        M = api.mass_matrix(model, q)
        assert np.all(M[:3, 3:] == 0.0) and np.all(M[3:, :3] == 0.0)
        np.testing.assert_allclose(np.diag(M)[:3],
                                   [model.obj.mass, model.obj.mass,
                                    model.obj.inertia])


def test_mass_symmetric_positive_definite():
    model = free_model(make_two_link_arm())
    for q in RNG.uniform(-np.pi, np.pi, (1000, 2)):
        M = api.mass_matrix(model, q)
        # columnwise inverse-dynamics assembly is symmetric to rounding only
        assert np.abs(M - M.T).max() <= 1e-12
        np.linalg.cholesky(M)  # raises if not positive definite


def test_bias_zero_without_gravity_and_motion():
    model = free_model(make_two_link_arm(gravity=0.0))
    for q in RNG.uniform(-3, 3, (5, 2)):
        np.testing.assert_allclose(api.bias(model, q, np.zeros(2)), 0.0,
                                   atol=1e-14)


def test_gravity_bias_matches_potential_gradient():
    arm = make_two_link_arm()
    model = free_model(arm)
    eps = 1e-6
    for q in RNG.uniform(-3, 3, (10, 2)):
        G = api.bias(model, q, np.zeros(2))
        for j in range(2):
            dq = np.zeros(2)
            dq[j] = eps
            fd = (potential(arm, q + dq) - potential(arm, q - dq)) / (2 * eps)
            assert G[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_power_balance_with_actuation():
    """dE/dt = qd . tau for the frictionless chain (skew-symmetry consequence)."""
    arm = make_two_link_arm()
    model = free_model(arm)
    h = 1e-4
    x = np.array([0.3, -0.5, 0.4, -0.2])
    tau = np.array([1.5, -0.8])
    for _ in range(50):
        xn = api.rk4_step(model, x, tau, h)
        e0 = kinetic(model, x[:2], x[2:]) + potential(arm, x[:2])
        e1 = kinetic(model, xn[:2], xn[2:]) + potential(arm, xn[:2])
        qd_mid = 0.5 * (x[2:] + xn[2:])
        assert (e1 - e0) / h == pytest.approx(float(qd_mid @ tau), abs=2e-3)
        x = xn


def test_passive_two_link_energy_drift():
    arm = make_two_link_arm()
    model = free_model(arm)
    h = 1e-3
    x = np.array([0.4, 0.9, 0.0, 0.0])
    e0 = kinetic(model, x[:2], x[2:]) + potential(arm, x[:2])
    worst = 0.0
    for _ in range(5000):  # 5 s
        x = api.rk4_step(model, x, np.zeros(2), h)
        e = kinetic(model, x[:2], x[2:]) + potential(arm, x[:2])
        worst = max(worst, abs(e - e0) / abs(e0))
    assert worst <= 1e-4


def attach_state(model: SystemModel, q_arm, qd_arm=None):
    """State with the object placed consistently on the contact constraint."""
    ip, fp = model.pack()
    kern = get_backend("python")
    ee = kern.fk_ee(ip, fp, q_arm)
    n = model.arm.n
    qd_arm = np.zeros(n) if qd_arm is None else qd_arm
    if model.contact.mode == MODE_GRASP:
        qo = np.array([ee[0], ee[1], ee[2] - model.contact.grasp_dtheta])
        qdo = kern.ee_jacobian(ip, fp, q_arm) @ qd_arm
    else:
        d = model.contact.push_dir
        qo = np.array([ee[0] + d * model.obj.hx, -0.1, 0.0])
        J = kern.ee_jacobian(ip, fp, q_arm)
        qdo = np.array([float(J[0] @ qd_arm), 0.0, 0.0])
    return np.concatenate([qo, q_arm, qdo, qd_arm])


@pytest.mark.parametrize("maker", [grasp_model, push_model])
def test_gap_zero_at_attachment(maker):
    model = maker()
    x = attach_state(model, np.array([0.4, -0.7]))
    phi, _ = api.gap_and_jacobian(model, x[: model.nq])
    np.testing.assert_allclose(phi, 0.0, atol=1e-12)


def test_grasp_gap_has_three_entries():
    model = grasp_model()
    x = attach_state(model, np.array([0.2, 0.3]))
    phi, J = api.gap_and_jacobian(model, x[: model.nq])
    assert phi.shape == (3,) and J.shape == (3, model.nq)


@pytest.mark.parametrize("maker", [grasp_model, push_model])
def test_gap_jacobian_matches_finite_differences(maker):
    model = maker()
    eps = 1e-7
    for q_arm in RNG.uniform(-1.5, 1.5, (5, 2)):
        x = attach_state(model, q_arm)
        q = x[: model.nq] + RNG.uniform(-0.01, 0.01, model.nq)
        _, J = api.gap_and_jacobian(model, q)
        for j in range(model.nq):
            dq = np.zeros(model.nq)
            dq[j] = eps
            fd = (api.gap_and_jacobian(model, q + dq)[0]
                  - api.gap_and_jacobian(model, q - dq)[0]) / (2 * eps)
            np.testing.assert_allclose(J[:, j], fd, rtol=1e-5, atol=1e-6)


def test_contact_force_zero_without_excitation():
    arm = make_two_link_arm(gravity=1e-12)
    model = SystemModel(arm, ObjectModel(0.5, 0.002, 0.03, 0.04),
                        ContactSpec(MODE_GRASP))
    x = attach_state(model, np.array([0.4, -0.7]))
    lam = api.contact_force(model, x[: model.nq], x[model.nq:], np.zeros(2))
    np.testing.assert_allclose(lam, 0.0, atol=1e-9)


def test_static_hold_supports_object_weight():
    """At an equilibrium, the constraint force balances the object's gravity
    load on the object rows of the dynamics."""
    from scipy.optimize import least_squares

    model = grasp_model()
    x = attach_state(model, np.array([0.4, -0.7]))

    def acc(tau):
        xdot, _ = api.forward_dynamics(model, x, tau)
        return xdot[model.nq:]

    sol = least_squares(acc, np.zeros(2), xtol=1e-14, ftol=1e-14)
    lam = api.contact_force(model, x[: model.nq], x[model.nq:], sol.x)
    _, J = api.gap_and_jacobian(model, x[: model.nq])
    gen_obj = (J.T @ lam)[:3]
    mo_g = model.obj.mass * model.arm.gravity
    # object equilibrium: generalized contact force equals the gravity bias
    np.testing.assert_allclose(gen_obj, [0.0, mo_g, 0.0], atol=2e-5)


def test_contact_acceleration_consistency():
    """J qdd + Jdot qd + alpha J qd = 0 along in-contact dynamics."""
    eps = 1e-7
    for maker in (grasp_model, push_model):
        model = maker()
        x = attach_state(model, np.array([0.3, -0.6]), np.array([0.5, -0.4]))
        tau = np.array([2.0, -1.0])
        xdot, _ = api.forward_dynamics(model, x, tau)
        q, qd = x[: model.nq], x[model.nq:]
        qdd = xdot[model.nq:]
        _, J = api.gap_and_jacobian(model, q)
        Jp = api.gap_and_jacobian(model, q + eps * qd)[1]
        Jm = api.gap_and_jacobian(model, q - eps * qd)[1]
        jdot_qd = ((Jp - Jm) / (2 * eps)) @ qd
        residual = J @ qdd + jdot_qd + model.baumgarte_alpha * (J @ qd)
        np.testing.assert_allclose(residual, 0.0, atol=1e-6)


def test_torque_has_no_direct_object_force():
    """Equal-and-opposite check: with the contact force subtracted, torque
    changes nothing on the object rows."""
    model = grasp_model()
    x = attach_state(model, np.array([0.3, -0.6]))
    M = api.mass_matrix(model, x[: model.nq])
    C = api.bias(model, x[: model.nq], x[model.nq:])
    for tau in RNG.uniform(-5, 5, (3, 2)):
        xdot, lam = api.forward_dynamics(model, x, tau)
        _, J = api.gap_and_jacobian(model, x[: model.nq])
        gen = M @ xdot[model.nq:] + C - J.T @ lam
        np.testing.assert_allclose(gen[:3], 0.0, atol=1e-8)


def test_rk4_exact_on_double_integrator():
    model = free_model(make_integrator_arm())
    h = 0.05
    x = np.array([0.2, -0.3])
    u = np.array([0.7])
    xn = api.rk4_step(model, x, u, h)
    np.testing.assert_allclose(
        xn, [0.2 - 0.3 * h + 0.5 * 0.7 * h * h, -0.3 + 0.7 * h], rtol=1e-12)


def test_rk4_small_step_limit():
    model = free_model(make_two_link_arm())
    x = np.array([0.3, -0.5, 0.4, -0.2])
    xn = api.rk4_step(model, x, np.zeros(2), 1e-12)
    np.testing.assert_allclose(xn, x, atol=1e-9)


def test_rk4_local_error_order():
    """Halving h shrinks the local error ~2^5 on the nonlinear chain."""
    model = free_model(make_two_link_arm())
    x = np.array([0.3, -0.5, 0.8, -0.6])
    tau = np.zeros(2)

    def err(h):
        one = api.rk4_step(model, x, tau, h)
        two = api.rk4_step(model, api.rk4_step(model, x, tau, h / 2), tau, h / 2)
        return np.abs(one - two).max()

    e1, e2 = err(0.02), err(0.01)
    order = np.log2(e1 / e2)
    assert 4.4 <= order <= 5.6


def test_dimension_mismatch_raises():
    model = free_model(make_two_link_arm())
    with pytest.raises(DimensionMismatch):
        api.mass_matrix(model, np.zeros(3))
    with pytest.raises(DimensionMismatch):
        api.forward_dynamics(model, np.zeros(4), np.zeros(3))


def test_backends_agree():
    py, cc = get_backend("python"), get_backend("compiled")
    for maker in (grasp_model, push_model):
        model = maker()
        ip, fp = model.pack()
        x = attach_state(model, np.array([0.3, -0.6]), np.array([0.4, -0.2]))
        U = RNG.normal(0.0, 2.0, (40, 2))
        Xp, Lp = py.rollout(ip, fp, x, U, 0.01)
        Xc, Lc = cc.rollout(ip, fp, x, U, 0.01)
        np.testing.assert_allclose(Xp, Xc, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(Lp, Lc, rtol=1e-10, atol=1e-12)
