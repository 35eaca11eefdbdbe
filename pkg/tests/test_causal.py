"""Causal-graph construction, pruning, and subtask decomposition."""

from __future__ import annotations

import pytest

from tampkit.causal import graph as cg
from tampkit.errors import EmptyGoal
from tampkit.fixtures.generators import decoupled_symbolic
from tampkit.fixtures.loader import fixture_text
from tampkit.symbolic.ground import ground
from tampkit.symbolic.parser import parse_domain, parse_problem
from tampkit.symbolic.types import GroundAtom


@pytest.fixture(scope="module")
def clutter_graph(clutter):
    grounded = ground(clutter["domain"], clutter["problem"])
    g = cg.build(clutter["domain"], clutter["problem"], grounded)
    return grounded, g


def test_edge_set_matches_brute_force(clutter, clutter_graph):
    grounded, g = clutter_graph
    expected = set()
    for act in grounded:
        pre = act.pos_pre | act.neg_pre
        eff = act.add | act.delete
        for u in pre:
            for v in eff:
                if u != v:
                    expected.add(frozenset((u, v)))
        eff = sorted(eff)
        for i, u in enumerate(eff):
            for v in eff[i + 1:]:
                expected.add(frozenset((u, v)))
    assert set(g.edges) == expected
    for e in g.edges:
        assert len(e) == 2 and e <= g.vertices


def test_single_action_single_edge():
    domain = parse_domain("""
    (define (domain one)
      (:predicates (p ?x) (e ?x))
      (:action act :parameters (?x) :kinds (?x object)
        :precondition (and (p ?x)) :effect (and (e ?x))))
    """)
    problem = parse_problem("""
    (define (problem one-1) (:domain one)
      (:objects a) (:kinds (object a))
      (:init (p a)) (:goal (and (e a))))
    """, domain)
    g = cg.build(domain, problem, ground(domain, problem))
    assert g.edges == frozenset({frozenset({GroundAtom("p", ("a",)),
                                            GroundAtom("e", ("a",))})})


def test_prune_rules(clutter, clutter_graph):
    _, g = clutter_graph
    init = clutter["problem"].init
    pruned = cg.prune(g, init)
    names = {v.name for v in pruned.vertices}
    assert "free" not in names
    kept_unob = [v for v in pruned.vertices if v.name == "unobstructed"]
    # the one false obstruction atom is retained, all true ones removed
    assert kept_unob == [GroundAtom("unobstructed", ("box-a", "box-b"))]
    removed = g.vertices - pruned.vertices
    for e in pruned.edges:
        assert not (e & removed)


def test_prune_identity_without_free_or_unobstructed():
    a, b = GroundAtom("p", ("x",)), GroundAtom("q", ("x",))
    g = cg.CausalGraph(frozenset({a, b}), frozenset({frozenset({a, b})}))
    assert cg.prune(g, frozenset()) == g


def test_prune_idempotent(clutter, clutter_graph):
    _, g = clutter_graph
    once = cg.prune(g, clutter["problem"].init)
    assert cg.prune(once, clutter["problem"].init) == once


def test_clutter_decomposition_shape(clutter, clutter_graph):
    _, g = clutter_graph
    problem = clutter["problem"]
    pruned = cg.prune(g, problem.init)
    subtasks = cg.decompose(pruned, problem.goal, frozenset({"arm1"}))
    assert len(subtasks) == 2
    ab = next(st for st in subtasks if "box-a" in st.entities)
    c = next(st for st in subtasks if "box-c" in st.entities)
    assert "box-b" in ab.entities and "box-c" not in ab.entities
    assert "box-a" not in c.entities and "box-b" not in c.entities
    # goal atoms partition across subtasks
    assert ab.goal_atoms | c.goal_atoms == problem.goal
    assert not (ab.goal_atoms & c.goal_atoms)
    # irrelevant objects (no goals) are dropped entirely
    mentioned = ab.entities | c.entities
    assert "box-d" not in mentioned and "box-e" not in mentioned


def test_fully_decoupled_gives_singleton_subtasks():
    domain, problem = decoupled_symbolic(4)
    grounded = ground(domain, problem)
    pruned = cg.prune(cg.build(domain, problem, grounded), problem.init)
    subtasks = cg.decompose(pruned, problem.goal, frozenset({"arm1"}))
    assert len(subtasks) == 4
    for st in subtasks:
        assert len(st.goal_atoms) == 1


def test_per_object_subgraphs_structurally_identical():
    """Decoupled objects induce isomorphic causal sub-graphs."""
    domain, problem = decoupled_symbolic(3)
    grounded = ground(domain, problem)
    pruned = cg.prune(cg.build(domain, problem, grounded), problem.init)

    def shape(obj, bn):
        sub = [v for v in pruned.vertices if obj in v.args]
        ren = {}
        for v in sorted(sub):
            args = tuple("O" if a == obj else "B" if a == bn else a
                         for a in v.args)
            ren[v] = GroundAtom(v.name, args)
        edges = {frozenset(ren[u] for u in e) for e in pruned.edges
                 if all(u in ren for u in e)}
        return frozenset(ren.values()), frozenset(edges)

    shapes = {shape(f"obj-{i}", f"bin-{i}") for i in (1, 2, 3)}
    assert len(shapes) == 1


def test_eleven_objects_six_manipulated():
    """Goals on 5 objects, one blocked by a 6th: subtasks mention exactly the
    6 ever-manipulated objects and exclude the other 5."""
    domain = parse_domain(fixture_text("manipulation.pddl"))
    objs = [f"o{i}" for i in range(1, 12)]
    bins = [f"z{i}" for i in range(1, 6)]
    goal_objs = objs[:5]
    blocker = objs[5]  # obstructs o1
    init = ["(free arm1)"]
    for o in objs:
        init += [f"(on {o} table)", f"(top-of {o} table)", f"(top-graspable {o})"]
        if o != goal_objs[0]:
            init.append(f"(graspable {o})")
    for a in objs:
        for b in objs:
            if a != b and not (a == goal_objs[0] and b == blocker):
                init.append(f"(unobstructed {a} {b})")
    for o, z in zip(goal_objs, bins):
        init.append(f"(drop-of {o} {z})")
    text = (
        "(define (problem big-clutter) (:domain desk-manip)\n"
        f"  (:objects arm1 {' '.join(objs)} table {' '.join(bins)})\n"
        f"  (:kinds (robot arm1) (object {' '.join(objs)}) (surface table)"
        f" (location {' '.join(bins)}))\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(f'(in {o} {z})' for o, z in zip(goal_objs, bins))}))\n)"
    )
    problem = parse_problem(text, domain)
    grounded = ground(domain, problem)
    pruned = cg.prune(cg.build(domain, problem, grounded), problem.init)
    subtasks = cg.decompose(pruned, problem.goal, frozenset({"arm1"}))
    manipulated = {e for st in subtasks for e in st.entities
                   if e.startswith("o") and e != "table"}
    assert manipulated == set(goal_objs) | {blocker}
    assert len(set(objs) - manipulated) == 5


def test_adding_true_unobstructed_never_merges_components(clutter, clutter_graph):
    _, g = clutter_graph
    init = clutter["problem"].init
    base = cg.prune(g, init)
    richer = cg.prune(g, init | {GroundAtom("unobstructed", ("box-a", "box-b"))})
    # with the obstruction resolved the a-b component can only split
    n_base = len(cg._components(base))
    n_richer = len(cg._components(richer))
    assert n_richer >= n_base


def test_decompose_empty_goal_raises(clutter_graph):
    _, g = clutter_graph
    with pytest.raises(EmptyGoal):
        cg.decompose(g, frozenset())


def test_subtask_separation_soundness(clutter, clutter_graph):
    """No ground action couples two subtasks through the pruned graph."""
    grounded, g = clutter_graph
    problem = clutter["problem"]
    pruned = cg.prune(g, problem.init)
    subtasks = cg.decompose(pruned, problem.goal, frozenset({"arm1"}))
    for act in grounded:
        pre = (act.pos_pre | act.neg_pre) & pruned.vertices
        eff = (act.add | act.delete) & pruned.vertices
        for i, a in enumerate(subtasks):
            for b in subtasks[i + 1:]:
                assert not ((pre & a.atoms and eff & b.atoms)
                            or (pre & b.atoms and eff & a.atoms))


def test_exports_are_text(clutter_graph, clutter):
    _, g = clutter_graph
    dot = cg.to_dot(g)
    assert dot.startswith("graph") and dot.rstrip().endswith("}")
    pruned = cg.prune(g, clutter["problem"].init)
    subtasks = cg.decompose(pruned, clutter["problem"].goal, frozenset({"arm1"}))
    text = cg.subtasks_to_text(subtasks)
    assert "box-a" in text and "in(box-c,bin-c)" in text.replace(" ", "")
