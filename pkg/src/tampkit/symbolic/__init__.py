from .ground import applicable, apply, dump_grounding, ground, is_applicable, is_goal, static_predicates
from .parser import parse_domain, parse_problem
from .types import (
    ActionSchema,
    DomainDef,
    Entity,
    GroundAction,
    GroundAtom,
    Literal,
    PredicateSchema,
    ProblemDef,
    SymbolicState,
    validate_state,
)

__all__ = [
    "ActionSchema", "DomainDef", "Entity", "GroundAction", "GroundAtom", "Literal",
    "PredicateSchema", "ProblemDef", "SymbolicState", "applicable", "apply",
    "dump_grounding", "ground", "is_applicable", "is_goal", "parse_domain",
    "parse_problem", "static_predicates", "validate_state",
]
