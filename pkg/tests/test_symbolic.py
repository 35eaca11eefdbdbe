"""Parser, grounding, and state-transition semantics."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tampkit.errors import (
    NotApplicable,
    PddlSyntaxError,
    UnknownEntity,
)
from tampkit.symbolic.ground import (
    applicable,
    apply,
    dump_grounding,
    ground,
    is_applicable,
    is_goal,
    static_predicates,
)
from tampkit.symbolic.parser import parse_domain, parse_problem
from tampkit.symbolic.types import GroundAtom, validate_state

MINI_DOMAIN = """
(define (domain mini)
  (:predicates (free ?r) (holding ?r ?o) (on ?o ?s) (at-top ?r ?o))
  (:action grasp-top
    :parameters (?r ?o ?s)
    :kinds (?r robot ?o object ?s surface)
    :precondition (and (free ?r) (at-top ?r ?o) (on ?o ?s))
    :effect (and (holding ?r ?o) (not (free ?r)) (not (on ?o ?s))))
  (:action release
    :parameters (?r ?o ?s)
    :kinds (?r robot ?o object ?s surface)
    :precondition (and (holding ?r ?o))
    :effect (and (free ?r) (on ?o ?s) (not (holding ?r ?o))))
)
"""

MINI_PROBLEM = """
(define (problem mini-1)
  (:domain mini)
  (:objects r1 a b t1 t2)
  (:kinds (robot r1) (object a b) (surface t1 t2))
  (:init (free r1) (on a t1) (on b t2) (at-top r1 a) (at-top r1 b))
  (:goal (and (on a t2)))
)
"""


@pytest.fixture(scope="module")
def mini():
    domain = parse_domain(MINI_DOMAIN)
    problem = parse_problem(MINI_PROBLEM, domain)
    return domain, problem


def test_grasp_schema_preconditions_and_effects(mini):
    domain, _ = mini
    schema = next(a for a in domain.actions if a.name == "grasp-top")
    pos = {(lit.name, tuple(lit.args)) for lit in schema.preconditions
           if lit.positive}
    assert ("free", ("?r",)) in pos
    assert ("at-top", ("?r", "?o")) in pos
    assert ("on", ("?o", "?s")) in pos
    adds = {(a.name, tuple(a.args)) for a in schema.add_effects}
    dels = {(a.name, tuple(a.args)) for a in schema.del_effects}
    assert adds == {("holding", ("?r", "?o"))}
    assert dels == {("free", ("?r",)), ("on", ("?o", "?s"))}


def test_domain_with_zero_actions():
    domain = parse_domain("(define (domain empty) (:predicates (p ?x)))")
    assert len(domain.actions) == 0


def test_unbalanced_parenthesis_is_syntax_error():
    with pytest.raises(PddlSyntaxError):
        parse_domain("(define (domain bad) (:predicates (p ?x))")


def test_goal_subset_of_init_is_valid(mini):
    domain, _ = mini
    text = MINI_PROBLEM.replace("(:goal (and (on a t2)))",
                                "(:goal (and (on a t1)))")
    problem = parse_problem(text, domain)
    assert is_goal(problem.init, problem.goal)


def test_goal_with_undeclared_entity_rejected(mini):
    domain, _ = mini
    text = MINI_PROBLEM.replace("(on a t2)", "(on d t2)")
    with pytest.raises(UnknownEntity):
        parse_problem(text, domain)


def test_grounding_count_matches_hand_enumeration(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    # grasp-top: 1 robot x 2 objects x 2 surfaces = 4; release likewise
    assert sum(1 for a in grounded if a.name == "grasp-top") == 4
    assert sum(1 for a in grounded if a.name == "release") == 4


def test_grounding_count_matches_brute_force(clutter):
    domain, problem = clutter["domain"], clutter["problem"]
    grounded = ground(domain, problem, prune_statics=False)
    by_kind = {}
    for e in problem.entities.values():
        by_kind.setdefault(e.kind, []).append(e.name)
    expected = 0
    for schema in domain.actions:
        pools = [by_kind.get(k, []) if k else list(problem.entities)
                 for k in schema.param_kinds]
        for combo in itertools.product(*pools):
            if len(set(combo)) == len(combo):  # distinct arguments
                expected += 1
    assert len(grounded) == expected


def test_static_filtering_grounds_unblock_only_for_blocking_pair(clutter):
    grounded = ground(clutter["domain"], clutter["problem"])
    unblocks = [a for a in grounded if a.name == "grasp-top-unblock"]
    # box-b blocks box-a and nothing else is obstructed
    assert {(a.args[1], a.args[2]) for a in unblocks} == {("box-a", "box-b")}


def test_no_entities_of_required_kind_gives_zero_groundings(mini):
    domain, _ = mini
    text = MINI_PROBLEM.replace("(:kinds (robot r1) (object a b) (surface t1 t2))",
                                "(:kinds (robot r1) (object a b t1 t2))")
    text = text.replace("(:init (free r1) (on a t1) (on b t2) "
                        "(at-top r1 a) (at-top r1 b))", "(:init (free r1))")
    text = text.replace("(:goal (and (on a t2)))", "(:goal (and (free r1)))")
    problem = parse_problem(text, domain)
    assert ground(domain, problem) == []


def test_applicable_matches_brute_force(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    state = problem.init
    fast = set(applicable(state, grounded))
    slow = {a for a in grounded
            if a.pos_pre <= state and not (a.neg_pre & state)}
    assert fast == slow


def test_holding_blocks_grasp(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    grasp = next(a for a in grounded if a.name == "grasp-top"
                 and a.args[1] == "a")
    held = apply(problem.init, grasp)
    assert not any(a.name == "grasp-top" for a in applicable(held, grounded))


def test_apply_add_delete_semantics(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    grasp = next(a for a in grounded
                 if a.name == "grasp-top" and a.args[1:] == ("a", "t1"))
    after = apply(problem.init, grasp)
    assert GroundAtom("holding", ("r1", "a")) in after
    assert GroundAtom("free", ("r1",)) not in after
    assert GroundAtom("on", ("a", "t1")) not in after


def test_grasp_release_round_trip(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    grasp = next(a for a in grounded
                 if a.name == "grasp-top" and a.args[1:] == ("a", "t1"))
    release = next(a for a in grounded
                   if a.name == "release" and a.args[1:] == ("a", "t1"))
    back = apply(apply(problem.init, grasp), release)
    keep = {"free", "holding", "on"}
    assert {a for a in back if a.name in keep} == \
        {a for a in problem.init if a.name in keep}


def test_apply_rejects_inapplicable(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    grasp_a = next(a for a in grounded
                   if a.name == "grasp-top" and a.args[1] == "a")
    grasp_b = next(a for a in grounded
                   if a.name == "grasp-top" and a.args[1] == "b")
    held = apply(problem.init, grasp_a)
    with pytest.raises(NotApplicable):
        apply(held, grasp_b)


def test_frame_property(mini):
    domain, problem = mini
    grounded = ground(domain, problem)
    grasp = next(a for a in grounded if a.name == "grasp-top")
    after = apply(problem.init, grasp)
    touched = grasp.add | grasp.delete
    assert problem.init - touched <= after


def test_grounding_deterministic_and_sorted(clutter):
    domain, problem = clutter["domain"], clutter["problem"]
    g1 = ground(domain, problem)
    g2 = ground(domain, problem)
    assert g1 == g2
    keys = [(a.name, a.args) for a in g1]
    assert keys == sorted(keys)
    assert dump_grounding(g1) == dump_grounding(g2)


def test_static_predicates_never_in_effects(clutter):
    domain = clutter["domain"]
    statics = static_predicates(domain)
    assert "unobstructed" in statics and "top-of" in statics
    for schema in domain.actions:
        for lit in schema.add_effects + schema.del_effects:
            assert lit.name not in statics


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=10 ** 6),
                min_size=0, max_size=25))
def test_exactly_one_hand_over_random_walks(choices):
    """Free/Holding invariant survives any applicable-action walk."""
    domain = parse_domain(MINI_DOMAIN)
    problem = parse_problem(MINI_PROBLEM, domain)
    grounded = ground(domain, problem)
    state = problem.init
    for c in choices:
        acts = applicable(state, grounded)
        if not acts:
            break
        state = apply(state, acts[c % len(acts)])
        validate_state(state, problem.entities)
        for a in applicable(state, grounded):
            assert is_applicable(state, a)


def test_closed_world_false_unobstructed(clutter):
    init = clutter["problem"].init
    assert GroundAtom("unobstructed", ("box-a", "box-b")) not in init
    others = [a for a in init if a.name == "unobstructed"]
    assert len(others) == 19  # 5*4 ordered pairs minus the blocked one
