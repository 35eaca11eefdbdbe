"""Parser for the supported PDDL subset.

Grammar: STRIPS with negative preconditions, conjunctions only. Typing syntax
is not supported; entity kinds come from a ``:kinds`` extension block in the
problem (and optional per-action ``:kinds`` parameter annotations in the
domain). Anything fancier (quantifiers, conditional effects, disjunctions,
numeric fluents) is rejected with a diagnostic naming the construct.
"""

from __future__ import annotations

import re

from ..errors import (
    ArityMismatch,
    PddlSyntaxError,
    UnknownEntity,
    UnknownPredicate,
    UnsupportedConstruct,
)
from .types import (
    KINDS,
    ActionSchema,
    DomainDef,
    Entity,
    GroundAtom,
    Literal,
    PredicateSchema,
    ProblemDef,
)

_UNSUPPORTED = {
    "forall", "exists", "when", "or", "imply", "oneof",
    "increase", "decrease", "assign", "=", ">=", "<=", ">", "<",
}

_TOKEN_RE = re.compile(r"[()\s;]|[^()\s;]+")


def _tokenize(text: str) -> list[tuple[str, int]]:
    """Lowercased tokens with character offsets; ';' comments stripped."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            m = _TOKEN_RE.match(text, i)
            tokens.append((m.group(0).lower(), i))
            i = m.end()
    return tokens


class _Reader:
    """S-expression reader over the token stream."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.end = len(text)

    def _offset(self):
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else self.end

    def read(self):
        """One s-expression: either (token, offset) or a list of expressions."""
        if self.pos >= len(self.tokens):
            raise PddlSyntaxError("unexpected end of input", self.end, "expression")
        tok, off = self.tokens[self.pos]
        self.pos += 1
        if tok == "(":
            items = []
            while True:
                if self.pos >= len(self.tokens):
                    raise PddlSyntaxError("unbalanced parenthesis", off, "')'")
                if self.tokens[self.pos][0] == ")":
                    self.pos += 1
                    return items
                items.append(self.read())
            # unreachable
        if tok == ")":
            raise PddlSyntaxError("unbalanced parenthesis", off, "expression")
        return (tok, off)

    def read_all(self):
        expr = self.read()
        if self.pos < len(self.tokens):
            raise PddlSyntaxError(
                "trailing tokens after top-level expression", self._offset(), "end of input"
            )
        return expr


def _is_atom(expr):
    return isinstance(expr, tuple)


def _head(expr):
    """Name and offset of a list expression's first element."""
    if not expr or not _is_atom(expr[0]):
        raise PddlSyntaxError("expected a named list", _expr_offset(expr), "identifier")
    return expr[0][0], expr[0][1]


def _expr_offset(expr):
    while not _is_atom(expr):
        if not expr:
            return 0
        expr = expr[0]
    return expr[1]


def _parse_literal(expr, params=None) -> Literal:
    if _is_atom(expr):
        raise PddlSyntaxError("expected a predicate application", expr[1], "'('")
    name, off = _head(expr)
    if name in _UNSUPPORTED:
        raise UnsupportedConstruct(name, off)
    positive = True
    if name == "not":
        if len(expr) != 2:
            raise PddlSyntaxError("'not' takes one literal", off, "single literal")
        inner = _parse_literal(expr[1], params)
        if not inner.positive:
            raise PddlSyntaxError("double negation", off, "positive literal")
        return Literal(inner.name, inner.args, positive=False)
    args = []
    for a in expr[1:]:
        if not _is_atom(a):
            raise PddlSyntaxError("nested expression in predicate arguments", off, "identifier")
        args.append(a[0])
    if params is not None:
        for a in args:
            if a.startswith("?") and a not in params:
                raise PddlSyntaxError(f"undeclared parameter {a}", off, "declared parameter")
    return Literal(name, tuple(args), positive)


def _parse_conjunction(expr, params=None) -> list[Literal]:
    if _is_atom(expr):
        raise PddlSyntaxError("expected a condition", expr[1], "'('")
    name, off = _head(expr)
    if name in _UNSUPPORTED:
        raise UnsupportedConstruct(name, off)
    if name == "and":
        lits = []
        for sub in expr[1:]:
            lits.extend(_parse_conjunction(sub, params))
        return lits
    return [_parse_literal(expr, params)]


def parse_domain(text: str) -> DomainDef:
    """Parse a domain definition in the supported grammar."""
    top = _Reader(text).read_all()
    name_, off = _head(top)
    if name_ != "define":
        raise PddlSyntaxError("expected '(define ...)'", off, "'define'")
    dom_decl = top[1] if len(top) > 1 else None
    if dom_decl is None or _is_atom(dom_decl) or _head(dom_decl)[0] != "domain":
        raise PddlSyntaxError("expected '(domain NAME)'", off, "'(domain NAME)'")
    domain_name = dom_decl[1][0]

    predicates: dict[str, PredicateSchema] = {}
    actions: list[ActionSchema] = []
    for section in top[2:]:
        sec, soff = _head(section)
        if sec == ":requirements":
            for req in section[1:]:
                if req[0] not in (":strips", ":negative-preconditions"):
                    raise UnsupportedConstruct(req[0], req[1])
        elif sec == ":predicates":
            for pdecl in section[1:]:
                pname, poff = _head(pdecl)
                arity = len(pdecl) - 1
                if pname in predicates:
                    raise PddlSyntaxError(f"duplicate predicate {pname}", poff, "fresh name")
                predicates[pname] = PredicateSchema(pname, arity)
        elif sec == ":action":
            actions.append(_parse_action(section, soff))
        elif sec in (":types", ":functions", ":constants", ":durative-action"):
            raise UnsupportedConstruct(sec, soff)
        else:
            raise PddlSyntaxError(f"unknown section {sec}", soff, "domain section")

    for act in actions:
        for lit in act.preconditions + act.add_effects + act.del_effects:
            if lit.name not in predicates:
                raise UnknownPredicate(f"action {act.name} uses undeclared predicate {lit.name}")
            if len(lit.args) != predicates[lit.name].arity:
                raise ArityMismatch(
                    f"{lit.name} used with {len(lit.args)} args in action {act.name}, "
                    f"declared arity {predicates[lit.name].arity}"
                )
    return DomainDef(domain_name, predicates, tuple(actions))


def _parse_action(section, off) -> ActionSchema:
    if len(section) < 2 or not _is_atom(section[1]):
        raise PddlSyntaxError("action needs a name", off, "action name")
    aname = section[1][0]
    fields = {}
    i = 2
    while i < len(section):
        key = section[i]
        if not _is_atom(key) or not key[0].startswith(":"):
            raise PddlSyntaxError(f"expected action keyword in {aname}", _expr_offset(key), "':keyword'")
        if i + 1 >= len(section):
            raise PddlSyntaxError(f"missing value for {key[0]} in {aname}", key[1], "expression")
        fields[key[0]] = section[i + 1]
        i += 2

    params_expr = fields.get(":parameters")
    if params_expr is None or _is_atom(params_expr):
        raise PddlSyntaxError(f"action {aname} missing :parameters", off, "'(?x ...)'")
    params = []
    for p in params_expr:
        if not _is_atom(p) or not p[0].startswith("?"):
            raise UnsupportedConstruct("typed parameter list", _expr_offset(p))
        params.append(p[0])

    kinds: dict[str, str] = {}
    kexpr = fields.get(":kinds")
    if kexpr is not None:
        flat = [t for t in kexpr]
        if len(flat) % 2:
            raise PddlSyntaxError(f"odd :kinds list in {aname}", off, "'?param kind' pairs")
        for j in range(0, len(flat), 2):
            pv, kv = flat[j], flat[j + 1]
            if kv[0] not in KINDS:
                raise PddlSyntaxError(f"unknown kind {kv[0]}", kv[1], "/".join(KINDS))
            if pv[0] not in params:
                raise PddlSyntaxError(f"undeclared parameter {pv[0]} in :kinds", pv[1], "parameter")
            kinds[pv[0]] = kv[0]

    pre = fields.get(":precondition")
    preconditions = tuple(_parse_conjunction(pre, set(params))) if pre is not None else ()
    eff = fields.get(":effect")
    effects = tuple(_parse_conjunction(eff, set(params))) if eff is not None else ()
    adds = tuple(l for l in effects if l.positive)
    dels = tuple(Literal(l.name, l.args, True) for l in effects if not l.positive)
    return ActionSchema(
        aname,
        tuple(params),
        tuple(kinds.get(p) for p in params),
        preconditions,
        adds,
        dels,
    )


def parse_problem(text: str, domain: DomainDef) -> ProblemDef:
    """Parse a problem against an already-parsed domain."""
    top = _Reader(text).read_all()
    name_, off = _head(top)
    if name_ != "define":
        raise PddlSyntaxError("expected '(define ...)'", off, "'define'")
    prob_decl = top[1] if len(top) > 1 else None
    if prob_decl is None or _is_atom(prob_decl) or _head(prob_decl)[0] != "problem":
        raise PddlSyntaxError("expected '(problem NAME)'", off, "'(problem NAME)'")
    problem_name = prob_decl[1][0]

    domain_name = None
    entities: dict[str, Entity] = {}
    init_atoms: list[GroundAtom] = []
    goal_atoms: list[GroundAtom] = []
    for section in top[2:]:
        sec, soff = _head(section)
        if sec == ":domain":
            domain_name = section[1][0]
        elif sec == ":objects":
            # names only; kinds come from the :kinds block
            for e in section[1:]:
                if not _is_atom(e) or e[0] == "-":
                    raise UnsupportedConstruct("typed object list", _expr_offset(e))
        elif sec == ":kinds":
            for group in section[1:]:
                kname, koff = _head(group)
                if kname not in KINDS:
                    raise PddlSyntaxError(f"unknown kind {kname}", koff, "/".join(KINDS))
                for e in group[1:]:
                    ename = e[0]
                    if ename in entities:
                        raise PddlSyntaxError(f"duplicate entity {ename}", e[1], "fresh name")
                    entities[ename] = Entity(ename, kname)
        elif sec == ":init":
            for a in section[1:]:
                lit = _parse_literal(a)
                if not lit.positive:
                    raise UnsupportedConstruct("negative init literal", _expr_offset(a))
                init_atoms.append(GroundAtom(lit.name, lit.args))
        elif sec == ":goal":
            for lit in _parse_conjunction(section[1]):
                if not lit.positive:
                    raise UnsupportedConstruct("negative goal literal", soff)
                goal_atoms.append(GroundAtom(lit.name, lit.args))
        else:
            raise PddlSyntaxError(f"unknown section {sec}", soff, "problem section")

    if domain_name is not None and domain_name != domain.name:
        raise PddlSyntaxError(
            f"problem targets domain {domain_name!r}, parsed domain is {domain.name!r}", off
        )

    for atom in init_atoms + goal_atoms:
        if atom.name not in domain.predicates:
            raise UnknownPredicate(f"undeclared predicate {atom.name} in {atom}")
        if len(atom.args) != domain.predicates[atom.name].arity:
            raise ArityMismatch(
                f"{atom}: declared arity {domain.predicates[atom.name].arity}"
            )
        for arg in atom.args:
            if arg not in entities:
                raise UnknownEntity(f"undeclared entity {arg} in {atom}")

    return ProblemDef(
        problem_name,
        domain_name or domain.name,
        entities,
        frozenset(init_atoms),
        frozenset(goal_atoms),
    )
