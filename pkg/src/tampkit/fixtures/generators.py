"""Programmatic problem families for the scaling study.

The ``decoupled`` family places P independent objects on a table, each with
its own bin, with every approach pose already established, so each object
needs exactly a grasp and a release. ``blocked_pairs`` couples the first
2*blocked_pairs objects into blocker/blocked pairs.
"""

from __future__ import annotations

import numpy as np

from ..binding.scene import BinGeom, ObjectState, Scene, Surface
from ..dynamics.models import ObjectModel
from ..errors import ScenarioError
from ..symbolic.parser import parse_domain, parse_problem
from .loader import fixture_text


def decoupled_problem_text(P: int, blocked_pairs: int = 0) -> str:
    if P < 1:
        raise ScenarioError("object count must be at least 1")
    if blocked_pairs < 0 or 2 * blocked_pairs > P:
        raise ScenarioError("blocked_pairs needs two objects per pair")
    objs = [f"obj-{i}" for i in range(1, P + 1)]
    bins = [f"bin-{i}" for i in range(1, P + 1)]
    blocked = {objs[2 * k] for k in range(blocked_pairs)}  # blocked by the next object
    init = ["(free arm1)"]
    for i, o in enumerate(objs):
        init += [f"(on {o} table)", f"(top-of {o} table)",
                 f"(top-graspable {o})", f"(at-top arm1 {o})",
                 f"(drop-of {o} {bins[i]})"]
        if o not in blocked:
            init.append(f"(graspable {o})")
    for a in objs:
        for b in objs:
            if a == b:
                continue
            if a in blocked and objs.index(b) == objs.index(a) + 1:
                continue  # b obstructs a
            init.append(f"(unobstructed {a} {b})")
    goal = [f"(in {objs[i]} {bins[i]})" for i in range(P)]
    return (
        "(define (problem decoupled-{P})\n"
        "  (:domain desk-manip)\n"
        "  (:objects arm1 {names} table {bins})\n"
        "  (:kinds (robot arm1) (object {names}) (surface table) (location {bins}))\n"
        "  (:init {init})\n"
        "  (:goal (and {goal}))\n"
        ")\n"
    ).format(P=P, names=" ".join(objs), bins=" ".join(bins),
             init="\n         ".join(init), goal=" ".join(goal))


def decoupled_symbolic(P: int, blocked_pairs: int = 0):
    domain = parse_domain(fixture_text("manipulation.pddl"))
    problem = parse_problem(decoupled_problem_text(P, blocked_pairs), domain)
    return domain, problem


def decoupled_scene(P: int, arm, base_costs=None) -> Scene:
    """Objects spread on a table below the base, one bin per object."""
    if base_costs is None:
        base_costs = [1.0] * P
    if len(base_costs) != P:
        raise ScenarioError(f"need {P} base costs")
    model = ObjectModel(0.4, 0.0004, 0.03, 0.04)
    objects, bins = {}, {}
    for i in range(P):
        frac = i / max(P - 1, 1)
        x = 0.25 + 0.45 * frac  # keep the tool-down wrist inside the arm's reach
        objects[f"obj-{i + 1}"] = ObjectState(
            model, np.array([x, -0.16, 0.0]), base_cost=float(base_costs[i]))
        bins[f"bin-{i + 1}"] = BinGeom(f"bin-{i + 1}", -0.25 - 0.40 * frac, -0.10)
    surfaces = {"table": Surface("table", 0.15, 0.85, -0.20)}
    return Scene(arm, objects, surfaces, bins,
                 q_home=np.array([0.5, -0.8, -0.5]))
