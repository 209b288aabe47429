"""Parser and canonical printer for the :strips/:typing PDDL subset.

Supported: flat type lists, typed parameters and objects, conjunctive
preconditions with optional negative literals, add/delete effects,
conjunctive goals with negative literals.  Everything else
(:durative-actions, numeric fluents, conditional effects, type
hierarchies, :constants, disjunctive goals) is rejected with an error
naming the construct.  Parsing is case-insensitive per PDDL convention;
the printers emit the canonical lowercase form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import DataError

Atom = tuple[str, tuple[str, ...]]

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":negative-preconditions")
OBJECT = "object"


class PddlParseError(DataError):
    pass


class UnsupportedRequirementError(PddlParseError):
    pass


class PddlTypeError(DataError):
    pass


@dataclass(frozen=True)
class Action:
    name: str
    parameters: tuple[tuple[str, str], ...]  # (?var, type)
    pre_pos: tuple[Atom, ...]
    pre_neg: tuple[Atom, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]


@dataclass(frozen=True)
class PddlDomain:
    name: str
    requirements: tuple[str, ...]
    types: tuple[str, ...]
    predicates: Mapping[str, tuple[str, ...]]  # name -> parameter types
    actions: tuple[Action, ...]

    def action(self, name: str) -> Action | None:
        for action in self.actions:
            if action.name == name:
                return action
        return None


@dataclass(frozen=True)
class PddlProblem:
    name: str
    domain_name: str
    objects: Mapping[str, str]  # object -> type
    init: frozenset[Atom]
    goal_pos: frozenset[Atom]
    goal_neg: frozenset[Atom]


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _read_sexp(text: str) -> list:
    text = re.sub(r";[^\n]*", "", text)
    tokens = _TOKEN.findall(text.lower())
    if not tokens:
        raise PddlParseError("empty PDDL text")
    pos = 0

    def read() -> object:
        nonlocal pos
        if pos >= len(tokens):
            raise PddlParseError("unbalanced parentheses: unexpected end of input")
        token = tokens[pos]
        pos += 1
        if token == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise PddlParseError("unbalanced parentheses: missing ')'")
            pos += 1
            return items
        if token == ")":
            raise PddlParseError(f"unexpected ')' at token {pos}")
        return token

    tree = read()
    if pos != len(tokens):
        raise PddlParseError(f"trailing content after form (token {pos + 1})")
    if not isinstance(tree, list):
        raise PddlParseError("top-level form must be a list")
    return tree


def _typed_list(tokens: Sequence[object], where: str) -> list[tuple[str, str]]:
    # "a b - t c d - t2 e"  ->  [(a,t),(b,t),(c,t2),(d,t2),(e,object)]
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not isinstance(token, str):
            raise PddlParseError(f"{where}: unexpected nested list in typed list")
        if token == "-":
            if i + 1 >= len(tokens) or not isinstance(tokens[i + 1], str):
                raise PddlParseError(f"{where}: dangling '-' in typed list")
            for name in pending:
                out.append((name, tokens[i + 1]))
            pending = []
            i += 2
        else:
            pending.append(token)
            i += 1
    out.extend((name, OBJECT) for name in pending)
    return out


def _literal(form: object, where: str) -> tuple[Atom, bool]:
    if not isinstance(form, list) or not form:
        raise PddlParseError(f"{where}: expected a literal, got {form!r}")
    if form[0] == "not":
        if len(form) != 2:
            raise PddlParseError(f"{where}: malformed (not ...)")
        atom, positive = _literal(form[1], where)
        if not positive:
            raise PddlParseError(f"{where}: double negation unsupported")
        return atom, False
    if any(not isinstance(part, str) for part in form):
        raise PddlParseError(f"{where}: nested form inside atom {form!r}")
    return (form[0], tuple(form[1:])), True


def _conjunction(form: object, where: str) -> tuple[list[Atom], list[Atom]]:
    positive: list[Atom] = []
    negative: list[Atom] = []
    if form is None or form == []:
        return positive, negative
    if isinstance(form, list) and form and form[0] == "and":
        parts = form[1:]
    else:
        parts = [form]
    for part in parts:
        if isinstance(part, list) and part and part[0] in ("or", "imply", "exists", "forall", "when"):
            raise UnsupportedRequirementError(f"{where}: unsupported construct {part[0]!r}")
        atom, is_positive = _literal(part, where)
        (positive if is_positive else negative).append(atom)
    return positive, negative


def _check_atom_schema(
    atom: Atom, predicates: Mapping[str, tuple[str, ...]], where: str
) -> None:
    if atom[0] not in predicates:
        raise PddlTypeError(f"{where}: undeclared predicate {atom[0]!r}")
    expected = len(predicates[atom[0]])
    if len(atom[1]) != expected:
        raise PddlTypeError(
            f"{where}: predicate {atom[0]!r} takes {expected} args, got {len(atom[1])}"
        )


def parse_domain(text: str) -> PddlDomain:
    tree = _read_sexp(text)
    if len(tree) < 2 or tree[0] != "define" or not (
        isinstance(tree[1], list) and len(tree[1]) == 2 and tree[1][0] == "domain"
    ):
        raise PddlParseError("expected (define (domain NAME) ...)")
    name = tree[1][1]
    requirements: tuple[str, ...] = ()
    types: tuple[str, ...] = ()
    predicates: dict[str, tuple[str, ...]] = {}
    actions: list[Action] = []
    for section in tree[2:]:
        if not isinstance(section, list) or not section:
            raise PddlParseError(f"malformed domain section {section!r}")
        head = section[0]
        if head == ":requirements":
            for requirement in section[1:]:
                if requirement not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(
                        f"unsupported requirement {requirement!r}; "
                        f"supported: {', '.join(SUPPORTED_REQUIREMENTS)}"
                    )
            requirements = tuple(section[1:])
        elif head == ":types":
            if "-" in section[1:]:
                raise UnsupportedRequirementError("type hierarchies are unsupported (flat :types only)")
            types = tuple(section[1:])
        elif head == ":predicates":
            for form in section[1:]:
                if not isinstance(form, list) or not form:
                    raise PddlParseError(f"malformed predicate declaration {form!r}")
                params = _typed_list(form[1:], f"predicate {form[0]}")
                for variable, _ in params:
                    if not variable.startswith("?"):
                        raise PddlParseError(
                            f"predicate {form[0]}: parameter {variable!r} must start with '?'"
                        )
                predicates[form[0]] = tuple(t for _, t in params)
        elif head == ":action":
            actions.append(_parse_action(section, predicates, types))
        elif head == ":constants":
            raise UnsupportedRequirementError("domain :constants are unsupported")
        elif head == ":functions":
            raise UnsupportedRequirementError("numeric fluents (:functions) are unsupported")
        else:
            raise PddlParseError(f"unknown domain section {head!r}")
    return PddlDomain(
        name=name,
        requirements=requirements,
        types=types,
        predicates=predicates,
        actions=tuple(actions),
    )


def _parse_action(
    section: list, predicates: Mapping[str, tuple[str, ...]], types: tuple[str, ...]
) -> Action:
    if len(section) < 2 or not isinstance(section[1], str):
        raise PddlParseError("malformed :action (missing name)")
    name = section[1]
    where = f"action {name!r}"
    fields: dict[str, object] = {}
    i = 2
    while i < len(section):
        key = section[i]
        if key not in (":parameters", ":precondition", ":effect"):
            raise PddlParseError(f"{where}: unknown action field {key!r}")
        if i + 1 >= len(section):
            raise PddlParseError(f"{where}: field {key!r} has no value")
        fields[key] = section[i + 1]
        i += 2
    params_form = fields.get(":parameters", [])
    if not isinstance(params_form, list):
        raise PddlParseError(f"{where}: :parameters must be a list")
    parameters = tuple(_typed_list(params_form, where))
    for variable, vtype in parameters:
        if not variable.startswith("?"):
            raise PddlParseError(f"{where}: parameter {variable!r} must start with '?'")
        if vtype != OBJECT and vtype not in types:
            raise PddlTypeError(f"{where}: unknown parameter type {vtype!r}")
    declared = {variable for variable, _ in parameters}
    pre_pos, pre_neg = _conjunction(fields.get(":precondition"), where)
    add, delete = _conjunction(fields.get(":effect"), where)
    for atom in [*pre_pos, *pre_neg, *add, *delete]:
        _check_atom_schema(atom, predicates, where)
        for arg in atom[1]:
            if arg.startswith("?") and arg not in declared:
                raise PddlParseError(f"{where}: undeclared variable {arg!r}")
    if set(add) & set(delete):
        clash = sorted(set(add) & set(delete))[0]
        raise PddlParseError(f"{where}: atom {clash} appears in both add and delete effects")
    return Action(
        name=name,
        parameters=parameters,
        pre_pos=tuple(pre_pos),
        pre_neg=tuple(pre_neg),
        add=tuple(add),
        delete=tuple(delete),
    )


def _compatible(object_type: str, wanted: str) -> bool:
    return wanted == OBJECT or object_type == wanted


def parse_problem(text: str, domain: PddlDomain) -> PddlProblem:
    tree = _read_sexp(text)
    if len(tree) < 2 or tree[0] != "define" or not (
        isinstance(tree[1], list) and len(tree[1]) == 2 and tree[1][0] == "problem"
    ):
        raise PddlParseError("expected (define (problem NAME) ...)")
    name = tree[1][1]
    domain_name = None
    objects: dict[str, str] = {}
    init: set[Atom] = set()
    goal_pos: frozenset[Atom] = frozenset()
    goal_neg: frozenset[Atom] = frozenset()
    for section in tree[2:]:
        if not isinstance(section, list) or not section:
            raise PddlParseError(f"malformed problem section {section!r}")
        head = section[0]
        if head == ":domain":
            domain_name = section[1]
        elif head == ":objects":
            for obj, otype in _typed_list(section[1:], ":objects"):
                if otype != OBJECT and otype not in domain.types:
                    raise PddlTypeError(f"object {obj!r} has unknown type {otype!r}")
                objects[obj] = otype
        elif head == ":init":
            for form in section[1:]:
                atom, positive = _literal(form, ":init")
                if not positive:
                    raise UnsupportedRequirementError(":init negative literals are unsupported")
                init.add(atom)
        elif head == ":goal":
            if len(section) != 2:
                raise PddlParseError(":goal must wrap a single formula")
            pos, neg = _conjunction(section[1], ":goal")
            goal_pos, goal_neg = frozenset(pos), frozenset(neg)
        else:
            raise PddlParseError(f"unknown problem section {head!r}")
    if domain_name != domain.name:
        raise PddlParseError(
            f"problem references domain {domain_name!r}, loaded domain is {domain.name!r}"
        )
    for atom in [*init, *goal_pos, *goal_neg]:
        _check_atom_schema(atom, domain.predicates, "problem")
        for arg, wanted in zip(atom[1], domain.predicates[atom[0]]):
            if arg not in objects:
                raise PddlTypeError(f"problem: unknown object {arg!r} in {atom}")
            if not _compatible(objects[arg], wanted):
                raise PddlTypeError(
                    f"problem: object {arg!r} of type {objects[arg]!r} "
                    f"cannot fill a {wanted!r} slot in {atom}"
                )
    return PddlProblem(
        name=name,
        domain_name=domain.name,
        objects=objects,
        init=frozenset(init),
        goal_pos=goal_pos,
        goal_neg=goal_neg,
    )


def _atom_text(atom: Atom) -> str:
    return "(" + " ".join([atom[0], *atom[1]]) + ")"


def _typed_text(pairs: Sequence[tuple[str, str]]) -> str:
    return " ".join(f"{name} - {vtype}" for name, vtype in pairs)


def domain_to_text(domain: PddlDomain) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        lines.append(f"  (:types {' '.join(domain.types)})")
    preds = " ".join(
        "(" + " ".join([name, *(f"?a{i} - {t}" for i, t in enumerate(types))]) + ")"
        for name, types in domain.predicates.items()
    )
    lines.append(f"  (:predicates {preds})")
    for action in domain.actions:
        pre = [_atom_text(a) for a in action.pre_pos] + [
            f"(not {_atom_text(a)})" for a in action.pre_neg
        ]
        eff = [_atom_text(a) for a in action.add] + [
            f"(not {_atom_text(a)})" for a in action.delete
        ]
        lines.append(
            f"  (:action {action.name}\n"
            f"    :parameters ({_typed_text(action.parameters)})\n"
            f"    :precondition (and {' '.join(pre)})\n"
            f"    :effect (and {' '.join(eff)}))"
        )
    return "\n".join(lines) + ")\n"


def problem_to_text(problem: PddlProblem) -> str:
    objects = _typed_text(sorted(problem.objects.items()))
    init = " ".join(_atom_text(a) for a in sorted(problem.init))
    goal = [_atom_text(a) for a in sorted(problem.goal_pos)] + [
        f"(not {_atom_text(a)})" for a in sorted(problem.goal_neg)
    ]
    return (
        f"(define (problem {problem.name})\n"
        f"  (:domain {problem.domain_name})\n"
        f"  (:objects {objects})\n"
        f"  (:init {init})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )
