"""STRIPS-subset PDDL: parsing, state simulation, plan validation, and a
baseline planner (breadth-first and A* with the additive heuristic)."""

from .parser import (
    Action,
    PddlDomain,
    PddlParseError,
    PddlProblem,
    PddlTypeError,
    UnsupportedRequirementError,
    domain_to_text,
    parse_domain,
    parse_problem,
    problem_to_text,
)
from .planning import (
    GroundAction,
    Plan,
    PlanValidation,
    PreconditionError,
    SolveResult,
    apply_action,
    format_plan,
    ground_actions,
    parse_plan,
    solve,
    validate_plan,
)

__all__ = [
    "Action",
    "GroundAction",
    "PddlDomain",
    "PddlParseError",
    "PddlProblem",
    "PddlTypeError",
    "Plan",
    "PlanValidation",
    "PreconditionError",
    "SolveResult",
    "UnsupportedRequirementError",
    "apply_action",
    "domain_to_text",
    "format_plan",
    "ground_actions",
    "parse_domain",
    "parse_plan",
    "parse_problem",
    "problem_to_text",
    "solve",
    "validate_plan",
]
