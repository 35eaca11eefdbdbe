"""Shared fixtures: fixture scenarios, small analytic models, solved plans.

Expensive full-pipeline solves (clutter, belt) are session-scoped so the
acceptance tests and unit tests share one run each.
"""

from __future__ import annotations

import numpy as np
import pytest

from tampkit import scenario as scenario_mod
from tampkit.binding.scene import Scene
from tampkit.dynamics.models import (
    MODE_FREE,
    ArmModel,
    ContactSpec,
    SystemModel,
)
from tampkit.fixtures.loader import fixture_path
from tampkit.trajopt.spec import ConstraintSets, TOSpec


@pytest.fixture(scope="session")
def clutter():
    scn = scenario_mod.load(fixture_path("clutter_small.yaml"))
    domain, problem = scenario_mod.load_symbolic(scn)
    return {
        "scn": scn,
        "domain": domain,
        "problem": problem,
        "scene": scenario_mod.build_scene(scn),
        "model": scenario_mod.build_base_model(scn),
        "config": scenario_mod.build_config(scn),
    }


@pytest.fixture(scope="session")
def belt():
    scn = scenario_mod.load(fixture_path("belt_snapshot.yaml"))
    domain, problem = scenario_mod.load_symbolic(scn)
    return {
        "scn": scn,
        "domain": domain,
        "problem": problem,
        "scene": scenario_mod.build_scene(scn),
        "model": scenario_mod.build_base_model(scn),
        "config": scenario_mod.build_config(scn),
    }


@pytest.fixture(scope="session")
def clutter_solution(clutter):
    """Refined clutter plan (the most expensive solve in the suite)."""
    from tampkit.search.solver import solve_problem

    return solve_problem(clutter["domain"], clutter["problem"], clutter["scene"],
                         clutter["model"], clutter["config"])


@pytest.fixture(scope="session")
def belt_solution(belt):
    from tampkit.search.solver import solve_problem

    return solve_problem(belt["domain"], belt["problem"], belt["scene"],
                         belt["model"], belt["config"])


def make_integrator_arm() -> ArmModel:
    """One joint, unit inertia, no gravity, COM at the axis: qdd = tau."""
    return ArmModel(lengths=(1.0,), masses=(1.0,), inertias=(1.0,), coms=(0.0,),
                    q_lo=(-50.0,), q_hi=(50.0,), qd_max=(100.0,),
                    tau_max=(1000.0,), gravity=0.0)


def integrator_spec(N=50, h=0.02, x0=(1.0, 0.0), qw=1.0, rw=0.1,
                    qfw=(10.0, 10.0), u_box=None) -> TOSpec:
    """Double-integrator tracking problem; RK4 is exact for this system."""
    arm = make_integrator_arm()
    model = SystemModel(arm, None, ContactSpec(MODE_FREE))
    if u_box is None:
        limits = ConstraintSets.unbounded(2, 1, 0)
    else:
        limits = ConstraintSets(
            np.full(2, -np.inf), np.full(2, np.inf),
            np.array([-u_box]), np.array([u_box]),
            np.zeros(0), np.zeros(0),
        )
    return TOSpec(
        model=model, N=N, h=h,
        x_init=np.asarray(x0, float), x_goal=np.zeros(2),
        Q=np.array([qw, qw]), R=np.array([rw]), Qf=np.asarray(qfw, float),
        limits=limits,
    )


def make_two_link_arm(gravity=9.81) -> ArmModel:
    return ArmModel(lengths=(0.5, 0.4), masses=(2.0, 1.5), inertias=(0.02, 0.01),
                    coms=(0.25, 0.20), q_lo=(-6.0, -6.0), q_hi=(6.0, 6.0),
                    qd_max=(50.0, 50.0), tau_max=(500.0, 500.0), gravity=gravity)


def fold_plan(problem, steps):
    """Apply a plan's actions from the initial state; returns the final state."""
    from tampkit.symbolic.ground import apply

    state = problem.init
    for s in steps:
        state = apply(state, s.action)
    return state


def box_violation(traj, limits) -> float:
    """Worst box-constraint violation over states and controls."""
    viol = 0.0
    for i in range(traj.X.shape[0]):
        viol = max(viol, float(np.max(limits.x_lo - traj.X[i], initial=0.0)),
                   float(np.max(traj.X[i] - limits.x_hi, initial=0.0)))
    for i in range(traj.U.shape[0]):
        viol = max(viol, float(np.max(limits.u_lo - traj.U[i], initial=0.0)),
                   float(np.max(traj.U[i] - limits.u_hi, initial=0.0)))
    return viol
