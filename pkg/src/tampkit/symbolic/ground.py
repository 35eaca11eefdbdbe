"""STRIPS grounding and state-transition semantics."""

from __future__ import annotations

import itertools

from ..errors import NotApplicable
from .types import DomainDef, GroundAction, GroundAtom, ProblemDef, SymbolicState


def static_predicates(domain: DomainDef) -> frozenset[str]:
    """Predicates that never occur in any action effect."""
    dynamic = set()
    for act in domain.actions:
        for lit in act.add_effects + act.del_effects:
            dynamic.add(lit.name)
    return frozenset(domain.predicates) - dynamic


def ground(domain: DomainDef, problem: ProblemDef, prune_statics: bool = True) -> list[GroundAction]:
    """Enumerate kind-consistent ground actions in deterministic order.

    With ``prune_statics`` (default), ground actions whose static preconditions
    are contradicted by the initial state are dropped: a static positive
    precondition must hold in init and a static negative one must not.
    """
    statics = static_predicates(domain) if prune_statics else frozenset()
    by_kind: dict[str | None, list[str]] = {None: sorted(problem.entities)}
    for e in problem.entities.values():
        by_kind.setdefault(e.kind, []).append(e.name)
    for names in by_kind.values():
        names.sort()

    out: list[GroundAction] = []
    for schema in domain.actions:
        pools = [by_kind.get(k, []) if k is not None else by_kind[None] for k in schema.param_kinds]
        for combo in itertools.product(*pools):
            if len(set(combo)) != len(combo):
                continue  # parameters bind distinct entities
            binding = dict(zip(schema.parameters, combo))
            pos_pre, neg_pre = set(), set()
            for lit in schema.preconditions:
                (pos_pre if lit.positive else neg_pre).add(lit.ground(binding))
            if prune_statics:
                ok = True
                for atom in pos_pre:
                    if atom.name in statics and atom not in problem.init:
                        ok = False
                        break
                if ok:
                    for atom in neg_pre:
                        if atom.name in statics and atom in problem.init:
                            ok = False
                            break
                if not ok:
                    continue
            add = frozenset(l.ground(binding) for l in schema.add_effects)
            delete = frozenset(l.ground(binding) for l in schema.del_effects)
            out.append(
                GroundAction(schema.name, combo, frozenset(pos_pre), frozenset(neg_pre), add, delete)
            )
    out.sort(key=lambda a: (a.name, a.args))
    return out


def is_applicable(state: SymbolicState, action: GroundAction) -> bool:
    return action.pos_pre <= state and not (action.neg_pre & state)


def applicable(state: SymbolicState, grounded: list[GroundAction]) -> list[GroundAction]:
    """Ground actions whose preconditions hold in ``state`` (closed world)."""
    return [a for a in grounded if is_applicable(state, a)]


def apply(state: SymbolicState, action: GroundAction) -> SymbolicState:
    """Successor state; raises NotApplicable if preconditions fail."""
    if not is_applicable(state, action):
        raise NotApplicable(f"{action} not applicable")
    return (state - action.delete) | action.add


def is_goal(state: SymbolicState, goal_atoms: frozenset[GroundAtom]) -> bool:
    return goal_atoms <= state


def dump_grounding(grounded: list[GroundAction]) -> str:
    """Line-oriented dump: ``action-name(arg1,arg2,...)`` one per line."""
    return "\n".join(str(a) for a in grounded) + ("\n" if grounded else "")
