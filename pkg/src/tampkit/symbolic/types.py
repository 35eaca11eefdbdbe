"""Core symbolic-planning value types.

Everything here is immutable after construction so states, schemas and ground
actions can be shared freely across concurrent subtask solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

KINDS = ("robot", "object", "location", "surface")


@dataclass(frozen=True)
class Entity:
    name: str
    kind: str  # one of KINDS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r} for entity {self.name!r}")


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    arity: int


@dataclass(frozen=True, order=True)
class GroundAtom:
    name: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class Literal:
    """Predicate applied to schema parameters, possibly negated."""

    name: str
    args: tuple[str, ...]
    positive: bool = True

    def ground(self, binding: dict[str, str]) -> GroundAtom:
        return GroundAtom(self.name, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[str, ...]
    param_kinds: tuple[str | None, ...]
    preconditions: tuple[Literal, ...]
    add_effects: tuple[Literal, ...]
    del_effects: tuple[Literal, ...]

    def __post_init__(self):
        adds = {(l.name, l.args) for l in self.add_effects}
        dels = {(l.name, l.args) for l in self.del_effects}
        if adds & dels:
            raise ValueError(f"action {self.name}: add and delete effects overlap")


@dataclass(frozen=True, order=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pos_pre: frozenset[GroundAtom] = field(compare=False)
    neg_pre: frozenset[GroundAtom] = field(compare=False)
    add: frozenset[GroundAtom] = field(compare=False)
    delete: frozenset[GroundAtom] = field(compare=False)

    def __str__(self):
        return f"{self.name}({','.join(self.args)})"


# A symbolic state is a frozenset of GroundAtom under the closed-world reading.
SymbolicState = frozenset


@dataclass(frozen=True)
class DomainDef:
    name: str
    predicates: dict[str, PredicateSchema]
    actions: tuple[ActionSchema, ...]


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain_name: str
    entities: dict[str, Entity]
    init: SymbolicState
    goal: frozenset[GroundAtom]


def validate_state(state: SymbolicState, entities: dict[str, Entity]) -> None:
    """Check the exactly-one-hand and single-support invariants.

    Raises ValueError on violation.
    """
    robots = [e.name for e in entities.values() if e.kind == "robot"]
    for r in robots:
        free = sum(1 for a in state if a.name == "free" and a.args == (r,))
        holding = [a for a in state if a.name == "holding" and a.args[0] == r]
        if free + len(holding) != 1:
            raise ValueError(
                f"robot {r}: expected exactly one of free/holding, "
                f"got free={free}, holding={holding}"
            )
    on_count: dict[str, int] = {}
    for a in state:
        if a.name == "on":
            on_count[a.args[0]] = on_count.get(a.args[0], 0) + 1
    for obj, cnt in on_count.items():
        if cnt > 1:
            raise ValueError(f"object {obj} on {cnt} surfaces at once")
