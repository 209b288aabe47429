"""Bounded-domain semantics: grounding, model enumeration, entailment,
and equivalence.

Interpretations are enumerated over domains built from the constants that
actually occur plus fresh elements, for every domain size from
max(1, #constants) up to max_domain.  "True"/"False" verdicts mean the
conclusion (resp. its negation) held in every premise-satisfying
interpretation at every size; anything else is Unknown.  Equivalence is
sound for refutation; a "true" answer is bounded verification only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterable, Mapping, Sequence

from ..errors import ConfigError, DataError, SymdelError
from .syntax import (
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
)

DEFAULT_MAX_DOMAIN = 3
DEFAULT_INTERPRETATION_CAP = 2**20


class EnumerationBudgetError(SymdelError):
    """Interpretation count exceeded the cap; distinct from Unknown."""


class Verdict(Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class EntailmentResult:
    verdict: Verdict
    unsatisfiable: bool = False


@dataclass(frozen=True)
class Theory:
    premises: tuple[Formula, ...]
    constants: frozenset[str]
    predicates: Mapping[str, int] = field(default_factory=dict)


def constants_of(formula: Formula) -> set[str]:
    if isinstance(formula, Atom):
        return {t.name for t in formula.args if isinstance(t, Const)}
    if isinstance(formula, Not):
        return constants_of(formula.body)
    if isinstance(formula, (And, Or, Implies, Iff)):
        return constants_of(formula.left) | constants_of(formula.right)
    if isinstance(formula, (Forall, Exists)):
        return constants_of(formula.body)
    raise TypeError(f"not a formula: {formula!r}")


def predicates_of(formula: Formula, into: dict[str, int] | None = None) -> dict[str, int]:
    arities = {} if into is None else into
    if isinstance(formula, Atom):
        known = arities.setdefault(formula.pred, len(formula.args))
        if known != len(formula.args):
            raise DataError(
                f"arity conflict for predicate {formula.pred!r}: "
                f"{len(formula.args)} vs {known}"
            )
    elif isinstance(formula, Not):
        predicates_of(formula.body, arities)
    elif isinstance(formula, (And, Or, Implies, Iff)):
        predicates_of(formula.left, arities)
        predicates_of(formula.right, arities)
    elif isinstance(formula, (Forall, Exists)):
        predicates_of(formula.body, arities)
    else:
        raise TypeError(f"not a formula: {formula!r}")
    return arities


def theory(premises: Iterable[Formula]) -> Theory:
    """Build a Theory, checking predicate arity consistency across premises."""
    premises = tuple(premises)
    arities: dict[str, int] = {}
    constants: set[str] = set()
    for premise in premises:
        predicates_of(premise, arities)
        constants |= constants_of(premise)
    return Theory(premises=premises, constants=frozenset(constants), predicates=arities)


def _substitute(formula: Formula, var: str, const: Const) -> Formula:
    if isinstance(formula, Atom):
        args = tuple(
            const if isinstance(t, Var) and t.name == var else t for t in formula.args
        )
        return Atom(formula.pred, args)
    if isinstance(formula, Not):
        return Not(_substitute(formula.body, var, const))
    if isinstance(formula, (And, Or, Implies, Iff)):
        kind = type(formula)
        return kind(
            _substitute(formula.left, var, const), _substitute(formula.right, var, const)
        )
    if isinstance(formula, (Forall, Exists)):
        if formula.var == var:  # inner binder shadows
            return formula
        kind = type(formula)
        return kind(formula.var, _substitute(formula.body, var, const))
    raise TypeError(f"not a formula: {formula!r}")


def ground(formula: Formula, domain: Sequence[str]) -> Formula:
    """Expand quantifiers over the domain; the result has no quantifiers."""
    if not domain:
        raise DataError("domain must be non-empty")
    if isinstance(formula, Atom):
        return formula
    if isinstance(formula, Not):
        return Not(ground(formula.body, domain))
    if isinstance(formula, (And, Or, Implies, Iff)):
        kind = type(formula)
        return kind(ground(formula.left, domain), ground(formula.right, domain))
    if isinstance(formula, (Forall, Exists)):
        parts = [
            ground(_substitute(formula.body, formula.var, Const(element)), domain)
            for element in domain
        ]
        join = And if isinstance(formula, Forall) else Or
        return reduce(join, parts)
    raise TypeError(f"not a formula: {formula!r}")


def ground_atoms(formula: Formula) -> list[Atom]:
    seen: dict[Atom, None] = {}

    def walk(node: Formula) -> None:
        if isinstance(node, Atom):
            seen.setdefault(node, None)
        elif isinstance(node, Not):
            walk(node.body)
        elif isinstance(node, (And, Or, Implies, Iff)):
            walk(node.left)
            walk(node.right)
        else:
            raise DataError("formula still contains quantifiers; ground it first")

    walk(formula)
    return list(seen)


def evaluate(formula: Formula, truth: Mapping[Atom, bool]) -> bool:
    if isinstance(formula, Atom):
        return truth[formula]
    if isinstance(formula, Not):
        return not evaluate(formula.body, truth)
    if isinstance(formula, And):
        return evaluate(formula.left, truth) and evaluate(formula.right, truth)
    if isinstance(formula, Or):
        return evaluate(formula.left, truth) or evaluate(formula.right, truth)
    if isinstance(formula, Implies):
        return (not evaluate(formula.left, truth)) or evaluate(formula.right, truth)
    if isinstance(formula, Iff):
        return evaluate(formula.left, truth) == evaluate(formula.right, truth)
    raise DataError("formula still contains quantifiers; ground it first")


def _domains(constants: frozenset[str], max_domain: int) -> list[tuple[str, ...]]:
    base = tuple(sorted(constants))
    start = max(1, len(base))
    if max_domain < start:
        raise ConfigError(
            f"max_domain {max_domain} is below the constant count {len(base)}"
        )
    out = []
    for size in range(start, max_domain + 1):
        fresh = tuple(f"_e{i}" for i in range(1, size - len(base) + 1))
        out.append(base + fresh)
    return out


def _assignments(atoms: list[Atom], cap: int):
    if len(atoms) > 60 or 2 ** len(atoms) > cap:
        raise EnumerationBudgetError(
            f"{2 ** min(len(atoms), 63)} interpretations over {len(atoms)} ground atoms "
            f"exceeds the cap of {cap}"
        )
    for values in itertools.product((False, True), repeat=len(atoms)):
        yield dict(zip(atoms, values))


def entails(
    theory_: Theory,
    conclusion: Formula,
    max_domain: int = DEFAULT_MAX_DOMAIN,
    interpretation_cap: int = DEFAULT_INTERPRETATION_CAP,
) -> EntailmentResult:
    """Three-way verdict by enumeration over all bounded interpretations.

    A theory with no premise-satisfying interpretation at any enumerated size
    is reported unsatisfiable (verdict Unknown, flag set).
    """
    arities = dict(theory_.predicates)
    predicates_of(conclusion, arities)
    constants = theory_.constants | frozenset(constants_of(conclusion))
    always_true = True
    always_false = True
    any_model = False
    for domain in _domains(constants, max_domain):
        premises = [ground(p, domain) for p in theory_.premises]
        goal = ground(conclusion, domain)
        atoms: dict[Atom, None] = {}
        for g in [*premises, goal]:
            for atom in ground_atoms(g):
                atoms.setdefault(atom, None)
        for truth in _assignments(list(atoms), interpretation_cap):
            if not all(evaluate(p, truth) for p in premises):
                continue
            any_model = True
            if evaluate(goal, truth):
                always_false = False
            else:
                always_true = False
            if not always_true and not always_false:
                return EntailmentResult(Verdict.UNKNOWN)
    if not any_model:
        return EntailmentResult(Verdict.UNKNOWN, unsatisfiable=True)
    if always_true:
        return EntailmentResult(Verdict.TRUE)
    if always_false:
        return EntailmentResult(Verdict.FALSE)
    return EntailmentResult(Verdict.UNKNOWN)


def equivalent(
    f: Formula,
    g: Formula,
    max_domain: int = DEFAULT_MAX_DOMAIN,
    interpretation_cap: int = DEFAULT_INTERPRETATION_CAP,
) -> bool:
    """True iff f <-> g holds in every interpretation at every bounded size."""
    arities = predicates_of(f)
    predicates_of(g, arities)
    constants = frozenset(constants_of(f) | constants_of(g))
    for domain in _domains(constants, max_domain):
        left = ground(f, domain)
        right = ground(g, domain)
        atoms: dict[Atom, None] = {}
        for atom in ground_atoms(left):
            atoms.setdefault(atom, None)
        for atom in ground_atoms(right):
            atoms.setdefault(atom, None)
        for truth in _assignments(list(atoms), interpretation_cap):
            if evaluate(left, truth) != evaluate(right, truth):
                return False
    return True
