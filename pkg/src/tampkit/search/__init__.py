from .search import (
    PlanStep,
    SearchConfig,
    Searcher,
    SearchNode,
    SearchStats,
    Solution,
    discrete_cost,
    enumerate_solutions,
    refine,
    search,
)
from .solver import (
    ProblemSolution,
    decompose_problem,
    robot_entities,
    solve_problem,
    subtask_actions,
)

__all__ = [
    "PlanStep",
    "SearchConfig",
    "Searcher",
    "SearchNode",
    "SearchStats",
    "Solution",
    "discrete_cost",
    "enumerate_solutions",
    "refine",
    "search",
    "ProblemSolution",
    "decompose_problem",
    "robot_entities",
    "solve_problem",
    "subtask_actions",
]
