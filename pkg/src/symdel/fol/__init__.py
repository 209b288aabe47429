"""Function-free first-order logic: parser, bounded model enumeration,
entailment verdicts, and the equivalence check behind the LE metric."""

from .syntax import (
    And,
    Atom,
    Const,
    Exists,
    Forall,
    FolParseError,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    parse_fol,
    to_ascii,
)
from .engine import (
    EnumerationBudgetError,
    EntailmentResult,
    Theory,
    Verdict,
    entails,
    equivalent,
    ground,
    theory,
)

__all__ = [
    "And",
    "Atom",
    "Const",
    "EntailmentResult",
    "EnumerationBudgetError",
    "Exists",
    "FolParseError",
    "Forall",
    "Formula",
    "Iff",
    "Implies",
    "Not",
    "Or",
    "Theory",
    "Var",
    "Verdict",
    "entails",
    "equivalent",
    "ground",
    "parse_fol",
    "theory",
    "to_ascii",
]
