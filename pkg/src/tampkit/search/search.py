"""Multi-stage best-first search over symbolic states with trajectory edge costs.

Edges are costed lazily: a child enters the frontier with its discrete cost
only (a lower bound, since path costs are nonnegative) and is charged its
stage-1 trajectory cost when first popped, then re-queued. A node expands or
returns only when popped with its edge already evaluated, so the frontier
order is exact despite the deferred evaluation. Found plans are refined edge
by edge with the stage-2 consensus solver; refinement failure sends the
search on to the next-best plan.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from ..binding.bind import (
    DEFAULT_PROFILES,
    BoundAction,
    arm_substate,
    bind_action,
    feedforward_controls,
    update_scene,
)
from ..binding.scene import Scene
from ..dynamics.api import ManipulatorDynamics
from ..dynamics.models import SystemModel
from ..errors import Infeasible, NoSolution, NotConverged
from ..symbolic.ground import applicable, apply, is_goal
from ..symbolic.types import GroundAction, SymbolicState
from ..trajopt.admm import AdmmConfig, admm_solve
from ..trajopt.ddp import DdpOptions, ddp_solve, rollout
from ..trajopt.spec import Trajectory

log = logging.getLogger("tampkit.search")


@dataclass
class SearchConfig:
    depth_bound: int = 8
    priority_alpha: float = 2.0
    seed: int = 0
    refine: bool = True  # stage-2 refinement of found plans
    init_std: float = 0.2  # random warm-start control magnitude
    max_expansions: int = 100000
    allowed_actions: tuple[str, ...] | None = None  # restrict by schema name
    ddp_opts: DdpOptions = field(default_factory=lambda: DdpOptions(max_iters=120))
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    profiles: dict = field(default_factory=lambda: dict(DEFAULT_PROFILES))


@dataclass
class SearchStats:
    expansions: int = 0
    ddp_calls: int = 0
    ik_failures: int = 0
    cache_hits: int = 0
    refinements: int = 0


@dataclass
class SearchNode:
    uid: int
    parent: "SearchNode | None"
    action: GroundAction | None
    state: SymbolicState
    depth: int
    cost: float  # cost-so-far; a lower bound until the edge is evaluated
    discrete: float  # discrete cost of the incoming edge
    scene: Scene | None = None
    arm_state: np.ndarray | None = None
    bound: BoundAction | None = None
    traj: Trajectory | None = None
    path_cost: float = 0.0
    evaluated: bool = True
    goal_flag: bool = False

    def plan(self) -> list["SearchNode"]:
        """Edge nodes from root to here (root excluded)."""
        out = []
        node = self
        while node.parent is not None:
            out.append(node)
            node = node.parent
        return out[::-1]


@dataclass
class PlanStep:
    action: GroundAction
    j_path: float
    j_discrete: float
    cumulative: float
    trajectory: Trajectory
    bound: BoundAction
    residuals: list = field(default_factory=list)  # stage-2 iteration records


@dataclass
class Solution:
    steps: list[PlanStep]
    cost: float
    final_state: SymbolicState
    final_scene: Scene
    final_arm_state: np.ndarray
    stats: SearchStats

    @property
    def actions(self) -> list[GroundAction]:
        return [s.action for s in self.steps]

    def cumulative_curve(self) -> list[float]:
        return [s.cumulative for s in self.steps]


def discrete_cost(state: SymbolicState, action: GroundAction, scene: Scene,
                  goal_atoms, priority_alpha: float,
                  profiles=None) -> float:
    """Base action cost plus the priority surcharge for unprocessed objects.

    An object is unprocessed while some goal atom mentioning it is unmet.
    Unprocessed objects are ranked ascending by base cost, so the costliest
    carries the largest alpha power and is cheapest to clear first.
    """
    profiles = profiles or DEFAULT_PROFILES
    base = profiles[action.name].base_cost if action.name in profiles else 1.0
    names = set()
    for atom in goal_atoms:
        if atom in state:
            continue
        names.update(arg for arg in atom.args if arg in scene.objects)
    unprocessed = sorted(scene.objects[n].base_cost for n in names)
    surcharge = sum(c * priority_alpha ** p for p, c in enumerate(unprocessed))
    return base + surcharge


class _Reachability:
    """Memoized bounded-depth symbolic reachability for the goal-in-subtree flag."""

    def __init__(self, actions, goal_atoms):
        self.actions = actions
        self.goal = goal_atoms
        self.memo: dict = {}

    def reachable(self, state: SymbolicState, depth: int) -> bool:
        if is_goal(state, self.goal):
            return True
        if depth <= 0:
            return False
        key = (state, depth)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.memo[key] = False  # cycle guard
        out = False
        for a in applicable(state, self.actions):
            if self.reachable(apply(state, a), depth - 1):
                out = True
                break
        self.memo[key] = out
        return out


def _scene_key(scene: Scene, arm_state) -> tuple:
    objs = []
    for name in sorted(scene.objects):
        o = scene.objects[name]
        objs.append((name, tuple(np.round(o.pose, 9)), o.attached,
                     round(o.grasp_dtheta, 9)))
    return (tuple(np.round(arm_state, 9)), tuple(objs))


class Searcher:
    """Best-first search over one (sub)problem with stage-1 edge costing."""

    def __init__(self, actions: list[GroundAction], init_state: SymbolicState,
                 goal_atoms, scene: Scene, arm_state, base_model: SystemModel,
                 config: SearchConfig, stats: SearchStats | None = None):
        self.actions = actions
        self.goal = frozenset(goal_atoms)
        self.config = config
        self.base_model = base_model
        self.stats = stats if stats is not None else SearchStats()
        self.reach = _Reachability(actions, self.goal)
        self.edge_cache: dict = {}
        self._uid = itertools.count()
        self._seq = itertools.count()
        self.root = SearchNode(
            uid=next(self._uid), parent=None, action=None, state=init_state,
            depth=0, cost=0.0, discrete=0.0, scene=scene,
            arm_state=np.asarray(arm_state, float),
            goal_flag=self.reach.reachable(init_state, config.depth_bound),
        )
        self.frontier: list = []
        self._push(self.root)

    def _push(self, node: SearchNode):
        heapq.heappush(self.frontier,
                       ((0 if node.goal_flag else 1), node.cost, next(self._seq), node))

    def _edge_rng(self, key):
        # process-independent digest so a fixed seed reproduces exactly
        digest = hashlib.blake2b(repr(key).encode(), digest_size=4).digest()
        return np.random.default_rng([self.config.seed,
                                      int.from_bytes(digest, "little")])

    def _evaluate(self, node: SearchNode) -> bool:
        """Cost the incoming edge with a stage-1 solve; False if IK-infeasible."""
        parent = node.parent
        key = (node.action, _scene_key(parent.scene, parent.arm_state))
        hit = self.edge_cache.get(key)
        if hit is None:
            try:
                bound = bind_action(node.action, parent.state, parent.scene,
                                    parent.arm_state, self.base_model,
                                    self.config.profiles)
            except Infeasible:
                self.stats.ik_failures += 1
                self.edge_cache[key] = None
                return False
            dyn = ManipulatorDynamics(bound.spec.model, bound.spec.h)
            # digest a canonical tuple: frozenset reprs in the action would
            # leak the process hash seed into the stream
            rng = self._edge_rng((node.action.name, node.action.args, key[1]))
            ff = feedforward_controls(bound)
            noise = rng.normal(0.0, self.config.init_std,
                               (bound.spec.N - 1, bound.spec.model.nu))
            # open-loop noise can blow up over long unstable horizons; keep
            # the noise-free rollout when it is the better start
            warm = rollout(bound.spec, dyn, ff + noise)
            plain = rollout(bound.spec, dyn, ff)
            if not np.isfinite(warm.cost) or plain.cost < warm.cost:
                warm = plain
            self.stats.ddp_calls += 1
            try:
                traj = ddp_solve(bound.spec, dyn, warm,
                                 opts=self.config.ddp_opts)
            except (NotConverged, Infeasible):
                self.stats.ik_failures += 1
                self.edge_cache[key] = None
                return False
            scene_after = update_scene(bound, parent.scene, traj.X[-1])
            arm_after = arm_substate(bound, traj.X[-1])
            hit = (bound, traj, scene_after, arm_after)
            self.edge_cache[key] = hit
        else:
            if hit is None:
                return False
            self.stats.cache_hits += 1
        bound, traj, scene_after, arm_after = hit
        node.bound = bound
        node.traj = traj
        node.path_cost = traj.cost
        node.cost = node.cost + traj.cost
        node.scene = scene_after
        node.arm_state = arm_after
        node.evaluated = True
        return True

    def _expand(self, node: SearchNode):
        self.stats.expansions += 1
        if node.depth >= self.config.depth_bound:
            return
        remaining = self.config.depth_bound - node.depth - 1
        for a in applicable(node.state, self.actions):
            child_state = apply(node.state, a)
            child = SearchNode(
                uid=next(self._uid), parent=node, action=a,
                state=child_state, depth=node.depth + 1,
                cost=node.cost, discrete=0.0, evaluated=False,
                goal_flag=self.reach.reachable(child_state, remaining),
            )
            child.discrete = discrete_cost(child_state, a, node.scene, self.goal,
                                           self.config.priority_alpha,
                                           self.config.profiles)
            child.cost = node.cost + child.discrete
            self._push(child)

    def goal_nodes(self):
        """Yield goal-reaching nodes in ascending cost order."""
        while self.frontier:
            _, _, _, node = heapq.heappop(self.frontier)
            if not node.evaluated:
                if self._evaluate(node):
                    self._push(node)  # re-queue with the true cost
                continue
            if is_goal(node.state, self.goal):
                yield node
                continue
            if self.stats.expansions >= self.config.max_expansions:
                return
            self._expand(node)

    def solution_from(self, node: SearchNode,
                      refined: list[tuple] | None = None) -> Solution:
        steps = []
        cumulative = 0.0
        edges = node.plan()
        scene, arm_state = node.scene, node.arm_state
        if refined is not None:
            scene, arm_state = self.root.scene, self.root.arm_state
        for i, e in enumerate(edges):
            if refined is not None:
                traj, bound, history = refined[i]
                path_cost = traj.cost
            else:
                traj, bound, history = e.traj, e.bound, []
                path_cost = e.path_cost
            cumulative += path_cost + e.discrete
            steps.append(PlanStep(e.action, path_cost, e.discrete, cumulative,
                                  traj, bound, history))
            if refined is not None:
                scene = update_scene(bound, scene, traj.X[-1])
                arm_state = arm_substate(bound, traj.X[-1])
        cost = cumulative if steps else node.cost
        return Solution(steps, cost, node.state, scene, arm_state, self.stats)


def refine(edges: list[SearchNode], root_scene: Scene, root_arm_state,
           base_model: SystemModel, config: SearchConfig,
           stats: SearchStats | None = None) -> list[tuple[Trajectory, list]]:
    """Stage-2 refinement along a plan, re-binding each edge to its refined
    predecessor's terminal state; yields (trajectory, bound action, residual
    history) per edge. Raises Infeasible if any segment fails."""
    scene = root_scene
    arm_state = np.asarray(root_arm_state, float)
    out = []
    cfg = config.admm
    if cfg.stage != 2:
        cfg = AdmmConfig(**{**cfg.__dict__, "stage": 2})
    for e in edges:
        bound = bind_action(e.action, None, scene, arm_state, base_model,
                            config.profiles)
        dyn = ManipulatorDynamics(bound.spec.model, bound.spec.h)
        # Re-solve stage 1 from the re-bound boundary before refining. The
        # carry dynamics are open-loop unstable, so replaying the stage-1
        # controls from a shifted start can diverge; fall back to a
        # zero-control start whenever the replay is the worse initialization.
        warm = rollout(bound.spec, dyn, e.traj.U)
        cold = rollout(bound.spec, dyn, feedforward_controls(bound))
        if not np.isfinite(warm.cost) or cold.cost < warm.cost:
            warm = cold
        try:
            warm = ddp_solve(bound.spec, dyn, warm, opts=config.ddp_opts)
        except NotConverged as exc:
            raise Infeasible(f"stage-1 re-solve failed for {e.action}") from exc
        if stats is not None:
            stats.ddp_calls += 1
        traj, history = admm_solve(bound.spec, dyn, warm, cfg)
        if stats is not None:
            stats.refinements += 1
        out.append((traj, bound, history))
        scene = update_scene(bound, scene, traj.X[-1])
        arm_state = arm_substate(bound, traj.X[-1])
    return out


def search(actions, init_state, goal_atoms, scene: Scene, arm_state,
           base_model: SystemModel, config: SearchConfig,
           stats: SearchStats | None = None) -> Solution:
    """First feasible minimum-cost plan; stage-2 refined when configured.

    On refinement infeasibility the next-best goal node is tried, per the
    multi-stage scheme. Raises NoSolution when the frontier is exhausted.
    """
    s = Searcher(actions, init_state, goal_atoms, scene, arm_state, base_model,
                 config, stats)
    for node in s.goal_nodes():
        if not config.refine:
            return s.solution_from(node)
        edges = node.plan()
        if not edges:
            return s.solution_from(node)
        try:
            trajs = refine(edges, scene, arm_state, base_model, config, s.stats)
        except Infeasible as exc:
            log.info("refinement infeasible for %s: %s",
                     [str(a.action) for a in edges], exc)
            continue
        return s.solution_from(node, trajs)
    raise NoSolution("frontier exhausted without a feasible plan")


def enumerate_solutions(actions, init_state, goal_atoms, scene: Scene, arm_state,
                        base_model: SystemModel, config: SearchConfig,
                        k: int) -> list[Solution]:
    """Up to k distinct goal-reaching plans with stage-1 costs, cost-ascending."""
    if k < 1:
        raise ValueError("k must be at least 1")
    s = Searcher(actions, init_state, goal_atoms, scene, arm_state, base_model,
                 config)
    out = []
    seen = set()
    for node in s.goal_nodes():
        sig = tuple((a.name, a.args) for a in [e.action for e in node.plan()])
        if sig in seen:
            continue
        seen.add(sig)
        out.append(s.solution_from(node))
        if len(out) >= k:
            break
    return out
