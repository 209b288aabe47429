"""Formula ASTs, the parser, and the canonical ASCII printer.

Grammar (both Unicode and ASCII spellings, whitespace-insensitive):

    formula  := iff
    iff      := implies (("<->" | "↔") implies)*          left-associative
    implies  := or ("->" | "→") implies | or              right-associative
    or       := and (("|" | "∨" | "or") and)*
    and      := unary (("&" | "∧" | "and") unary)*
    unary    := ("~" | "!" | "¬" | "not") unary | quantifier | primary
    quantifier := ("forall" | "∀" | "exists" | "∃") VAR unary
    primary  := "(" formula ")" | atom
    atom     := NAME "(" term ("," term)* ")" | NAME      (bare NAME: 0-ary)

Precedence: ¬ > ∧ > ∨ > → > ↔.  Term resolution: a name bound by an
enclosing quantifier is a variable occurrence; an unbound single
UPPERCASE letter is rejected as a free variable (uppercase singles are
reserved for variables); everything else, including numerals like ``180``
or ``d180``, is an opaque constant symbol.  A quantifier binds the
smallest formula that follows it; parenthesize for a wider scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from ..errors import DataError


class FolParseError(DataError):
    """Syntax error, unbound variable, or arity conflict, with position."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Iff, Forall, Exists]

_TOKEN = re.compile(
    r"\s*(<->|↔|<=>|->|→|⇒|∀|∃|¬|∧|∨|~|!|&|\||\(|\)|,|[A-Za-z_][A-Za-z0-9_°]*|[0-9][A-Za-z0-9_°]*)"
)

_KEYWORDS = {
    "forall": "FORALL",
    "∀": "FORALL",
    "exists": "EXISTS",
    "∃": "EXISTS",
    "not": "NOT",
    "¬": "NOT",
    "~": "NOT",
    "!": "NOT",
    "and": "AND",
    "∧": "AND",
    "&": "AND",
    "or": "OR",
    "∨": "OR",
    "|": "OR",
    "->": "IMPLIES",
    "→": "IMPLIES",
    "⇒": "IMPLIES",
    "<->": "IFF",
    "↔": "IFF",
    "<=>": "IFF",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FolParseError(f"unexpected character {stripped[0]!r} at position {at}")
        lexeme = match.group(1)
        kind = _KEYWORDS.get(lexeme, "NAME")
        tokens.append((kind, lexeme, match.start(1)))
        pos = match.end()
    return tokens


def _is_variable_name(name: str) -> bool:
    return len(name) == 1 and name.isalpha()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.scope: list[str] = []
        self.arities: dict[str, int] = {}

    def error(self, message: str) -> FolParseError:
        if self.pos < len(self.tokens):
            _, lexeme, at = self.tokens[self.pos]
            return FolParseError(f"{message} at position {at} (near {lexeme!r})")
        return FolParseError(f"{message} at end of input")

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self, kind: str | None = None) -> tuple[str, str, int]:
        if self.pos >= len(self.tokens):
            raise self.error("unexpected end of input" if kind is None else f"expected {kind}")
        token = self.tokens[self.pos]
        if kind is not None and token[0] != kind:
            raise self.error(f"expected {kind}")
        self.pos += 1
        return token

    def parse(self) -> Formula:
        formula = self.iff()
        if self.pos != len(self.tokens):
            raise self.error("trailing input")
        return formula

    def iff(self) -> Formula:
        left = self.implies()
        while self.peek() == "IFF":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.or_()
        if self.peek() == "IMPLIES":
            self.take()
            return Implies(left, self.implies())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.peek() == "OR":
            self.take()
            left = Or(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.unary()
        while self.peek() == "AND":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind = self.peek()
        if kind == "NOT":
            self.take()
            return Not(self.unary())
        if kind in ("FORALL", "EXISTS"):
            quant, _, _ = self.take()
            _, name, at = self.take("NAME")
            if not _is_variable_name(name):
                raise FolParseError(
                    f"invalid quantified variable {name!r} at position {at} "
                    "(variables are single letters)"
                )
            self.scope.append(name)
            body = self.unary()
            self.scope.pop()
            return Forall(name, body) if quant == "FORALL" else Exists(name, body)
        return self.primary()

    def primary(self) -> Formula:
        kind = self.peek()
        if kind == "LPAREN":
            self.take()
            inner = self.iff()
            self.take("RPAREN")
            return inner
        if kind == "NAME":
            return self.atom()
        raise self.error("expected a formula")

    def atom(self) -> Formula:
        _, name, at = self.take("NAME")
        if self.peek() != "LPAREN":
            if _is_variable_name(name):
                raise FolParseError(
                    f"expected a predicate at position {at}, found variable {name!r}"
                )
            return self._record(Atom(name), at)
        self.take("LPAREN")
        args = [self.term()]
        while self.peek() == "COMMA":
            self.take()
            args.append(self.term())
        self.take("RPAREN")
        return self._record(Atom(name, tuple(args)), at)

    def term(self) -> Term:
        _, name, at = self.take("NAME")
        if name in self.scope:
            return Var(name)
        if _is_variable_name(name) and name.isupper():
            raise FolParseError(f"unbound variable {name!r} at position {at}")
        return Const(name)

    def _record(self, atom: Atom, at: int) -> Atom:
        arity = len(atom.args)
        known = self.arities.setdefault(atom.pred, arity)
        if known != arity:
            raise FolParseError(
                f"arity conflict for {atom.pred!r} at position {at}: "
                f"{arity} args here, {known} elsewhere"
            )
        return atom


def parse_fol(text: str) -> Formula:
    """Parse one formula; raises FolParseError with a position on bad input."""
    if not text.strip():
        raise FolParseError("empty formula")
    return _Parser(text).parse()


def to_ascii(formula: Formula) -> str:
    """Canonical ASCII form; parse_fol(to_ascii(f)) reproduces f."""
    if isinstance(formula, Atom):
        if not formula.args:
            return formula.pred
        args = ", ".join(term.name for term in formula.args)
        return f"{formula.pred}({args})"
    if isinstance(formula, Not):
        return f"~{_wrap(formula.body)}"
    if isinstance(formula, And):
        return f"({to_ascii(formula.left)} & {to_ascii(formula.right)})"
    if isinstance(formula, Or):
        return f"({to_ascii(formula.left)} | {to_ascii(formula.right)})"
    if isinstance(formula, Implies):
        return f"({to_ascii(formula.left)} -> {to_ascii(formula.right)})"
    if isinstance(formula, Iff):
        return f"({to_ascii(formula.left)} <-> {to_ascii(formula.right)})"
    if isinstance(formula, Forall):
        return f"forall {formula.var} {_wrap(formula.body)}"
    if isinstance(formula, Exists):
        return f"exists {formula.var} {_wrap(formula.body)}"
    raise TypeError(f"not a formula: {formula!r}")


def _wrap(formula: Formula) -> str:
    text = to_ascii(formula)
    if isinstance(formula, (And, Or, Implies, Iff)) or text.startswith("("):
        return text
    return f"({text})" if isinstance(formula, (Forall, Exists)) else text
