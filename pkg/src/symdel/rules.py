"""Datalog-style forward chaining with stratified negation.

Concrete syntax (statements end with a period):

    fact P(a).
    fact ~Broken(wheel).            # explicit negative fact
    rule P(x) & ~Q(x) -> R(x).
    query R(a).                     # optional; used by the delegation layer

Identifiers u, v, w, x, y, z (optionally digit-suffixed) are variables;
every other identifier is a constant.  Rule heads are positive; safety
requires every head and negated-body variable to occur in a positive body
literal; negation is stratified.  Body negation is negation-as-failure
against the closure of lower strata; explicit negative facts participate in
query verdicts, not in rule evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DataError
from .fol.engine import Verdict


class RuleParseError(DataError):
    pass


_VAR = re.compile(r"[uvwxyz][0-9]*$")


def is_variable(token: str) -> bool:
    return bool(_VAR.match(token))


@dataclass(frozen=True)
class RAtom:
    pred: str
    args: tuple[str, ...]

    @property
    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: RAtom
    positive: bool = True

    def __str__(self) -> str:
        return ("" if self.positive else "~") + str(self.atom)


@dataclass(frozen=True)
class Rule:
    body: tuple[Literal, ...]
    head: RAtom

    def __str__(self) -> str:
        return " & ".join(map(str, self.body)) + " -> " + str(self.head)


@dataclass(frozen=True)
class RuleProgram:
    facts: frozenset[RAtom]
    negative_facts: frozenset[RAtom]
    rules: tuple[Rule, ...]
    semantics: str = "closed"  # "closed" | "open"
    queries: tuple[RAtom, ...] = ()


@dataclass(frozen=True)
class Closure:
    derived: frozenset[RAtom]
    strata: tuple[tuple[str, ...], ...]
    negative_facts: frozenset[RAtom] = frozenset()


_ATOM = re.compile(r"\s*(~?)\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)\s*")


def _parse_atom(text: str, where: str) -> tuple[RAtom, bool]:
    match = _ATOM.fullmatch(text)
    if not match:
        raise RuleParseError(f"{where}: cannot parse atom {text.strip()!r}")
    neg, pred, arg_text = match.groups()
    args = tuple(a.strip() for a in arg_text.split(",")) if arg_text.strip() else ()
    if any(not a for a in args):
        raise RuleParseError(f"{where}: empty argument in {text.strip()!r}")
    return RAtom(pred, args), neg == ""


def _check_rule(rule: Rule, where: str) -> None:
    positive_vars = {
        a for lit in rule.body if lit.positive for a in lit.atom.args if is_variable(a)
    }
    for literal in rule.body:
        if literal.positive:
            continue
        loose = [a for a in literal.atom.args if is_variable(a) and a not in positive_vars]
        if loose:
            raise RuleParseError(
                f"{where}: unsafe rule, variable(s) {loose} of {literal} "
                "have no positive binding"
            )
    loose = [a for a in rule.head.args if is_variable(a) and a not in positive_vars]
    if loose:
        raise RuleParseError(
            f"{where}: unsafe rule, head variable(s) {loose} have no positive binding"
        )


def stratify(rules: Iterable[Rule]) -> dict[str, int]:
    """Assign strata; raises on recursion through negation."""
    rules = list(rules)
    preds = {r.head.pred for r in rules} | {
        lit.atom.pred for r in rules for lit in r.body
    }
    stratum = dict.fromkeys(preds, 0)
    for _ in range(len(preds) + 1):
        changed = False
        for rule in rules:
            for literal in rule.body:
                bound = stratum[literal.atom.pred] + (0 if literal.positive else 1)
                if stratum[rule.head.pred] < bound:
                    stratum[rule.head.pred] = bound
                    changed = True
        if not changed:
            return stratum
    raise RuleParseError("program is not stratifiable: recursion through negation")


def parse_program(text: str, semantics: str = "closed") -> RuleProgram:
    """Parse, then verify safety and stratification."""
    if semantics not in ("closed", "open"):
        raise RuleParseError(f"unknown semantics flag {semantics!r}")
    facts: list[RAtom] = []
    negative: list[RAtom] = []
    rules: list[Rule] = []
    queries: list[RAtom] = []
    cleaned = re.sub(r"#[^\n]*", "", text)
    for index, statement in enumerate(cleaned.split("."), start=1):
        statement = statement.strip()
        if not statement:
            continue
        where = f"statement {index}"
        if statement.startswith("fact"):
            atom, positive = _parse_atom(statement[len("fact") :], where)
            if not atom.is_ground:
                raise RuleParseError(f"{where}: fact {atom} is not ground")
            (facts if positive else negative).append(atom)
        elif statement.startswith("rule"):
            if "->" not in statement:
                raise RuleParseError(f"{where}: rule lacks '->'")
            body_text, head_text = statement[len("rule") :].split("->", 1)
            head, head_positive = _parse_atom(head_text, where)
            if not head_positive:
                raise RuleParseError(f"{where}: rule head must be positive")
            body = tuple(
                Literal(atom=atom, positive=positive)
                for atom, positive in (
                    _parse_atom(part, where) for part in body_text.split("&")
                )
            )
            rule = Rule(body=body, head=head)
            _check_rule(rule, where)
            rules.append(rule)
        elif statement.startswith("query"):
            atom, positive = _parse_atom(statement[len("query") :], where)
            if not positive:
                raise RuleParseError(f"{where}: queries must be positive atoms")
            if not atom.is_ground:
                raise RuleParseError(f"{where}: query {atom} is not ground")
            queries.append(atom)
        else:
            raise RuleParseError(
                f"{where}: expected 'fact', 'rule', or 'query', got {statement[:30]!r}"
            )
    stratify(rules)  # raises if the program is unstratifiable
    return RuleProgram(
        facts=frozenset(facts),
        negative_facts=frozenset(negative),
        rules=tuple(rules),
        semantics=semantics,
        queries=tuple(queries),
    )


def program_to_text(program: RuleProgram) -> str:
    """Canonical printer: facts, then rules, then queries, sorted."""
    lines = [f"fact {atom}." for atom in sorted(program.facts, key=str)]
    lines += [f"fact ~{atom}." for atom in sorted(program.negative_facts, key=str)]
    lines += [f"rule {rule}." for rule in program.rules]
    lines += [f"query {atom}." for atom in program.queries]
    return "\n".join(lines) + "\n"


def _match(
    literal_atom: RAtom, fact: RAtom, binding: dict[str, str]
) -> dict[str, str] | None:
    if literal_atom.pred != fact.pred or len(literal_atom.args) != len(fact.args):
        return None
    out = dict(binding)
    for pattern, value in zip(literal_atom.args, fact.args):
        if is_variable(pattern):
            if out.get(pattern, value) != value:
                return None
            out[pattern] = value
        elif pattern != value:
            return None
    return out


def _substitute(atom: RAtom, binding: Mapping[str, str]) -> RAtom:
    return RAtom(atom.pred, tuple(binding.get(a, a) for a in atom.args))


def _fire(
    rule: Rule,
    delta_index: Mapping[str, list[RAtom]],
    full_index: Mapping[str, list[RAtom]],
    derived: frozenset[RAtom] | set[RAtom],
    seed_position: int,
) -> set[RAtom]:
    """All head instances derivable with the seed positive literal matched
    against the delta and the remaining literals against the full relation."""
    positives = [i for i, lit in enumerate(rule.body) if lit.positive]
    seed = positives[seed_position]
    bindings: list[dict[str, str]] = []
    for fact in delta_index.get(rule.body[seed].atom.pred, ()):
        binding = _match(rule.body[seed].atom, fact, {})
        if binding is not None:
            bindings.append(binding)
    for index, literal in enumerate(rule.body):
        if not literal.positive or index == seed:
            continue
        bindings = [
            extended
            for binding in bindings
            for fact in full_index.get(literal.atom.pred, ())
            for extended in [_match(literal.atom, fact, binding)]
            if extended is not None
        ]
        if not bindings:
            return set()
    out = set()
    for binding in bindings:
        if all(
            _substitute(lit.atom, binding) not in derived
            for lit in rule.body
            if not lit.positive
        ):
            out.add(_substitute(rule.head, binding))
    return out


def _indexed(atoms: Iterable[RAtom]) -> dict[str, list[RAtom]]:
    index: dict[str, list[RAtom]] = {}
    for atom in atoms:
        index.setdefault(atom.pred, []).append(atom)
    return index


def forward_chain(program: RuleProgram) -> Closure:
    """Least fixpoint, stratum by stratum, evaluated semi-naively.

    Terminates (finite Herbrand base, no function symbols) and is invariant
    under rule and fact permutation.
    """
    stratum_of = stratify(program.rules)
    levels = sorted(set(stratum_of.values())) if stratum_of else []
    derived: set[RAtom] = set(program.facts)
    strata_record = []
    for level in levels:
        level_rules = [r for r in program.rules if stratum_of[r.head.pred] == level]
        strata_record.append(
            tuple(sorted({r.head.pred for r in level_rules}))
        )
        delta = set(derived)
        while delta:
            full_index = _indexed(derived)
            delta_index = _indexed(delta)
            fresh: set[RAtom] = set()
            for rule in level_rules:
                positives = [i for i, lit in enumerate(rule.body) if lit.positive]
                for seed_position in range(len(positives)):
                    fresh |= _fire(rule, delta_index, full_index, derived, seed_position)
            delta = fresh - derived
            derived |= delta
    return Closure(
        derived=frozenset(derived),
        strata=tuple(strata_record),
        negative_facts=program.negative_facts,
    )


def query(closure: Closure, atom: RAtom, semantics: str = "closed") -> Verdict:
    """True if derived; else explicit negative or CWA gives False; else Unknown."""
    if not atom.is_ground:
        raise DataError(f"query atom {atom} is not ground")
    if atom in closure.derived:
        return Verdict.TRUE
    if atom in closure.negative_facts:
        return Verdict.FALSE
    if semantics == "closed":
        return Verdict.FALSE
    if semantics == "open":
        return Verdict.UNKNOWN
    raise DataError(f"unknown semantics flag {semantics!r}")
