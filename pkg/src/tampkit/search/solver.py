"""Problem-level pipeline: ground, decompose, solve each subtask in order."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..causal import graph as causal_graph
from ..causal.graph import Subtask
from ..dynamics.models import SystemModel
from ..errors import NoSolution
from ..symbolic.ground import ground, is_goal
from ..symbolic.types import DomainDef, GroundAction, ProblemDef
from .search import PlanStep, SearchConfig, SearchStats, Solution, search

log = logging.getLogger("tampkit.search")


@dataclass
class ProblemSolution:
    steps: list[PlanStep]
    cost: float
    subtask_solutions: list[Solution]
    subtasks: list[Subtask]
    stats: SearchStats

    @property
    def actions(self) -> list[GroundAction]:
        return [s.action for s in self.steps]


def subtask_actions(grounded: list[GroundAction], subtask: Subtask,
                    robot_names: frozenset[str]) -> list[GroundAction]:
    """Ground actions whose non-robot arguments all belong to the subtask."""
    return [a for a in grounded
            if all(arg in subtask.entities or arg in robot_names for arg in a.args)]


def robot_entities(problem: ProblemDef) -> frozenset[str]:
    return frozenset(e.name for e in problem.entities.values() if e.kind == "robot")


def decompose_problem(domain: DomainDef, problem: ProblemDef, scene,
                      grounded: list[GroundAction] | None = None) -> list[Subtask]:
    """Causal-graph subtask decomposition of a ground problem."""
    if grounded is None:
        grounded = ground(domain, problem)
    robots = robot_entities(problem)
    g = causal_graph.build(domain, problem, grounded)
    pruned = causal_graph.prune(g, problem.init)
    costs = {name: o.base_cost for name, o in scene.objects.items()}
    return causal_graph.decompose(pruned, problem.goal, robots, costs)


def solve_problem(domain: DomainDef, problem: ProblemDef, scene,
                  base_model: SystemModel, config: SearchConfig | None = None,
                  decompose: bool = True) -> ProblemSolution:
    """Full pipeline: one bilevel search per subtask, plans concatenated.

    The robot's continuous state and the scene carry over between subtasks, so
    each search starts where the previous plan physically ended. With
    ``decompose`` off the whole goal is one subtask over all entities.
    """
    config = config or SearchConfig()
    grounded = ground(domain, problem)
    if config.allowed_actions is not None:
        grounded = [a for a in grounded if a.name in config.allowed_actions]
    robots = robot_entities(problem)
    if decompose:
        subtasks = decompose_problem(domain, problem, scene, grounded)
    else:
        entities = frozenset(n for n in problem.entities if n not in robots)
        subtasks = [Subtask(0, frozenset(), problem.goal, entities)]

    stats = SearchStats()
    state = problem.init
    cur_scene = scene
    arm_state = np.concatenate([scene.q_home, np.zeros(scene.arm.n)])
    steps: list[PlanStep] = []
    solutions: list[Solution] = []
    cumulative = 0.0
    for st in subtasks:
        actions = subtask_actions(grounded, st, robots)
        log.info("subtask %d: %d goal atoms, %d ground actions",
                 st.id, len(st.goal_atoms), len(actions))
        try:
            sol = search(actions, state, st.goal_atoms, cur_scene, arm_state,
                         base_model, config, stats)
        except NoSolution as exc:
            raise NoSolution(str(exc), subtask_id=st.id) from exc
        for s in sol.steps:
            cumulative += s.j_path + s.j_discrete
            steps.append(PlanStep(s.action, s.j_path, s.j_discrete, cumulative,
                                  s.trajectory, s.bound, s.residuals))
        solutions.append(sol)
        state = sol.final_state
        cur_scene = sol.final_scene
        arm_state = sol.final_arm_state
    if not is_goal(state, problem.goal):
        raise NoSolution("subtask plans do not jointly reach the problem goal")
    return ProblemSolution(steps, cumulative, solutions, subtasks, stats)
