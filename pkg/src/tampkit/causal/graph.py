"""Causal graph over ground atoms: build, prune, decompose into subtasks."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import EmptyGoal
from ..symbolic.types import DomainDef, GroundAction, GroundAtom, ProblemDef, SymbolicState


@dataclass(frozen=True)
class CausalGraph:
    vertices: frozenset[GroundAtom]
    edges: frozenset[frozenset[GroundAtom]]  # unordered pairs, no self-loops


@dataclass(frozen=True)
class Subtask:
    id: int
    atoms: frozenset[GroundAtom]
    goal_atoms: frozenset[GroundAtom]
    entities: frozenset[str]  # non-robot entities mentioned by the atoms


def build(domain: DomainDef, problem: ProblemDef, grounded: list[GroundAction]) -> CausalGraph:
    """Vertices are atoms of init plus ground-action preconditions and effects;
    an edge joins a precondition atom to an effect atom of the same action, or
    two effect atoms of the same action."""
    vertices = set(problem.init)
    edges = set()
    for act in grounded:
        pre = act.pos_pre | act.neg_pre
        eff = act.add | act.delete
        vertices |= pre | eff
        for u in pre:
            for v in eff:
                if u != v:
                    edges.add(frozenset((u, v)))
        eff_list = sorted(eff)
        for i, u in enumerate(eff_list):
            for v in eff_list[i + 1:]:
                edges.add(frozenset((u, v)))
    return CausalGraph(frozenset(vertices), frozenset(edges))


def prune(graph: CausalGraph, initial_state: SymbolicState) -> CausalGraph:
    """Drop every ``free`` vertex and every ``unobstructed`` vertex that is
    true in the initial state, together with incident edges."""
    removed = {
        v
        for v in graph.vertices
        if v.name == "free" or (v.name == "unobstructed" and v in initial_state)
    }
    vertices = graph.vertices - removed
    edges = frozenset(e for e in graph.edges if not (e & removed))
    return CausalGraph(frozenset(vertices), edges)


def _components(graph: CausalGraph) -> list[frozenset[GroundAtom]]:
    adj: dict[GroundAtom, set[GroundAtom]] = {v: set() for v in graph.vertices}
    for e in graph.edges:
        u, v = tuple(e)
        adj[u].add(v)
        adj[v].add(u)
    seen: set[GroundAtom] = set()
    comps = []
    for start in sorted(graph.vertices):
        if start in seen:
            continue
        stack, comp = [start], set()
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.add(node)
            for nb in adj[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(frozenset(comp))
    return comps


def decompose(
    pruned_graph: CausalGraph,
    goal_atoms: frozenset[GroundAtom],
    robot_names: frozenset[str] = frozenset(),
    object_costs: dict[str, float] | None = None,
) -> list[Subtask]:
    """One subtask per connected component holding at least one goal atom.

    Components without goal atoms are irrelevant and dropped. Subtasks are
    ordered by the minimum base discrete cost among their objects, then by
    component id, which makes the processing order deterministic.
    """
    if not goal_atoms:
        raise EmptyGoal("goal atom set is empty")
    object_costs = object_costs or {}
    subtasks = []
    for comp in _components(pruned_graph):
        goals = goal_atoms & comp
        if not goals:
            continue
        entities = frozenset(
            arg for atom in comp for arg in atom.args if arg not in robot_names
        )
        subtasks.append(Subtask(len(subtasks), comp, goals, entities))
    def key(st: Subtask):
        costs = [object_costs[e] for e in st.entities if e in object_costs]
        return (min(costs) if costs else float("inf"), st.id)
    subtasks.sort(key=key)
    return [Subtask(i, st.atoms, st.goal_atoms, st.entities) for i, st in enumerate(subtasks)]


def to_dot(graph: CausalGraph) -> str:
    """DOT-compatible text for inspection."""
    lines = ["graph causal {"]
    for v in sorted(graph.vertices):
        lines.append(f'  "{v}";')
    for e in sorted(graph.edges, key=lambda e: tuple(sorted(e))):
        u, v = sorted(e)
        lines.append(f'  "{u}" -- "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def subtasks_to_text(subtasks: list[Subtask]) -> str:
    """Structured text export: one block per subtask."""
    blocks = []
    for st in subtasks:
        lines = [f"subtask {st.id}", "  goal:"]
        lines += [f"    {a}" for a in sorted(st.goal_atoms)]
        lines.append("  entities:")
        lines += [f"    {e}" for e in sorted(st.entities)]
        blocks.append("\n".join(lines))
    return "\n".join(blocks) + "\n"
