"""STRIPS semantics: grounding, state transition, plan validation, search.

States are frozensets of ground atoms.  Ground actions are enumerated in
lexicographic (name, args) order and the search frontier is expanded in
that order, so plans are deterministic.  BFS returns a shortest plan when
one exists within budget; A* with the additive heuristic returns a valid
(not necessarily optimal) plan faster on larger instances.
"""

from __future__ import annotations

import heapq
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import DataError
from .parser import Action, Atom, PddlDomain, PddlProblem, _compatible

DEFAULT_BUDGET = 200_000


class PreconditionError(DataError):
    pass


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]

    @property
    def signature(self) -> str:
        return "(" + " ".join([self.name, *self.args]) + ")"


@dataclass(frozen=True)
class Plan:
    steps: tuple[tuple[str, tuple[str, ...]], ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class PlanValidation:
    valid: bool
    final_state: frozenset[Atom] | None = None
    failed_step: int | None = None
    reason: str | None = None


@dataclass(frozen=True)
class SolveResult:
    status: str  # "solved" | "unsolvable" | "budget_exhausted"
    plan: Plan | None = None
    expanded: int = 0


def _instantiate(action: Action, binding: Mapping[str, str]) -> GroundAction:
    def sub(atoms: Iterable[Atom]) -> frozenset[Atom]:
        return frozenset(
            (pred, tuple(binding.get(a, a) for a in args)) for pred, args in atoms
        )

    return GroundAction(
        name=action.name,
        args=tuple(binding[v] for v, _ in action.parameters),
        pre_pos=sub(action.pre_pos),
        pre_neg=sub(action.pre_neg),
        add=sub(action.add),
        delete=sub(action.delete),
    )


def ground_actions(domain: PddlDomain, objects: Mapping[str, str]) -> list[GroundAction]:
    """Every type-correct instantiation, in lexicographic (name, args) order."""
    out: list[GroundAction] = []
    for action in domain.actions:
        candidates = [
            sorted(o for o, t in objects.items() if _compatible(t, wanted))
            for _, wanted in action.parameters
        ]
        bindings: list[dict[str, str]] = [{}]
        for (variable, _), pool in zip(action.parameters, candidates):
            bindings = [
                {**binding, variable: obj} for binding in bindings for obj in pool
            ]
        out.extend(_instantiate(action, binding) for binding in bindings)
    out.sort(key=lambda ga: (ga.name, ga.args))
    return out


def applicable(state: frozenset[Atom], action: GroundAction) -> bool:
    return action.pre_pos <= state and not (action.pre_neg & state)


def failing_literal(state: frozenset[Atom], action: GroundAction) -> str | None:
    for atom in sorted(action.pre_pos):
        if atom not in state:
            return f"({' '.join([atom[0], *atom[1]])})"
    for atom in sorted(action.pre_neg):
        if atom in state:
            return f"(not ({' '.join([atom[0], *atom[1]])}))"
    return None


def apply_action(
    state: frozenset[Atom], action: GroundAction, domain: PddlDomain | None = None
) -> frozenset[Atom]:
    """(state \\ delete) | add; raises naming the failing literal otherwise."""
    literal = failing_literal(state, action)
    if literal is not None:
        raise PreconditionError(
            f"action {action.signature} inapplicable: precondition {literal} fails"
        )
    return (state - action.delete) | action.add


_PLAN_STEP = re.compile(r"\(\s*([^\s()]+)((?:\s+[^\s()]+)*)\s*\)")


def parse_plan(text: str) -> Plan:
    """One `(action arg1 arg2)` per line; blank lines and ';' comments ignored."""
    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split(";", 1)[0].strip().lower()
        if not line:
            continue
        match = _PLAN_STEP.fullmatch(line)
        if not match:
            raise DataError(f"plan line {lineno}: cannot parse step {line!r}")
        steps.append((match.group(1), tuple(match.group(2).split())))
    return Plan(steps=tuple(steps))


def format_plan(plan: Plan) -> str:
    return "".join(f"({' '.join([name, *args])})\n" for name, args in plan.steps)


def _ground_lookup(
    domain: PddlDomain, problem: PddlProblem
) -> dict[tuple[str, tuple[str, ...]], GroundAction]:
    return {
        (ga.name, ga.args): ga for ga in ground_actions(domain, problem.objects)
    }


def goal_satisfied(problem: PddlProblem, state: frozenset[Atom]) -> bool:
    return problem.goal_pos <= state and not (problem.goal_neg & state)


def validate_plan(domain: PddlDomain, problem: PddlProblem, plan: Plan) -> PlanValidation:
    """Simulate from init; every precondition must hold and the goal must
    hold in the final state.  Invalidity is a result, not a fault."""
    lookup = _ground_lookup(domain, problem)
    state = problem.init
    for index, (name, args) in enumerate(plan.steps):
        action = lookup.get((name, args))
        if action is None:
            return PlanValidation(
                valid=False,
                failed_step=index,
                reason=f"unknown or ill-typed action ({' '.join([name, *args])})",
            )
        literal = failing_literal(state, action)
        if literal is not None:
            return PlanValidation(
                valid=False,
                failed_step=index,
                reason=f"precondition {literal} fails for {action.signature}",
            )
        state = (state - action.delete) | action.add
    if not goal_satisfied(problem, state):
        missing = sorted(problem.goal_pos - state)
        extra = sorted(problem.goal_neg & state)
        parts = [f"unsatisfied goal atom ({' '.join([a[0], *a[1]])})" for a in missing]
        parts += [f"forbidden goal atom ({' '.join([a[0], *a[1]])}) holds" for a in extra]
        return PlanValidation(
            valid=False, failed_step=len(plan.steps), reason="; ".join(parts)
        )
    return PlanValidation(valid=True, final_state=state)


def _reconstruct(
    parents: dict[frozenset[Atom], tuple[frozenset[Atom] | None, GroundAction | None]],
    state: frozenset[Atom],
) -> Plan:
    steps = []
    while True:
        parent, action = parents[state]
        if parent is None or action is None:
            break
        steps.append((action.name, action.args))
        state = parent
    return Plan(steps=tuple(reversed(steps)))


def _h_add(
    state: frozenset[Atom], actions: list[GroundAction], goal: frozenset[Atom]
) -> float:
    cost: dict[Atom, float] = {atom: 0.0 for atom in state}
    changed = True
    while changed:
        changed = False
        for action in actions:
            if any(p not in cost for p in action.pre_pos):
                continue
            total = 1.0 + sum(cost[p] for p in action.pre_pos)
            for atom in action.add:
                if total < cost.get(atom, float("inf")):
                    cost[atom] = total
                    changed = True
    return sum(cost.get(atom, float("inf")) for atom in goal)


def solve(
    domain: PddlDomain,
    problem: PddlProblem,
    strategy: str = "bfs",
    budget: int = DEFAULT_BUDGET,
) -> SolveResult:
    """Search for a plan; every returned plan passes validate_plan.

    "unsolvable" means the whole reachable space was exhausted;
    "budget_exhausted" means the node budget ran out first.
    """
    if strategy not in ("bfs", "astar_hadd"):
        raise DataError(f"unknown strategy {strategy!r}")
    actions = ground_actions(domain, problem.objects)
    start = problem.init
    parents: dict[frozenset[Atom], tuple[frozenset[Atom] | None, GroundAction | None]] = {
        start: (None, None)
    }
    expanded = 0

    if strategy == "bfs":
        frontier: deque[frozenset[Atom]] = deque([start])
        while frontier:
            state = frontier.popleft()
            if goal_satisfied(problem, state):
                return _finish(domain, problem, parents, state, expanded)
            if expanded >= budget:
                return SolveResult(status="budget_exhausted", expanded=expanded)
            expanded += 1
            for action in actions:
                if not applicable(state, action):
                    continue
                successor = (state - action.delete) | action.add
                if successor not in parents:
                    parents[successor] = (state, action)
                    frontier.append(successor)
        return SolveResult(status="unsolvable", expanded=expanded)

    counter = 0
    goal = problem.goal_pos
    heap: list[tuple[float, int, int]] = []
    states: list[frozenset[Atom]] = [start]
    g_cost = {start: 0}
    h0 = _h_add(start, actions, goal)
    heapq.heappush(heap, (h0, counter, 0))
    while heap:
        _, _, state_index = heapq.heappop(heap)
        state = states[state_index]
        if goal_satisfied(problem, state):
            return _finish(domain, problem, parents, state, expanded)
        if expanded >= budget:
            return SolveResult(status="budget_exhausted", expanded=expanded)
        expanded += 1
        for action in actions:
            if not applicable(state, action):
                continue
            successor = (state - action.delete) | action.add
            tentative = g_cost[state] + 1
            if tentative < g_cost.get(successor, float("inf")):
                g_cost[successor] = tentative
                parents[successor] = (state, action)
                h = _h_add(successor, actions, goal)
                if h == float("inf"):
                    continue
                counter += 1
                states.append(successor)
                heapq.heappush(heap, (tentative + h, counter, len(states) - 1))
    return SolveResult(status="unsolvable", expanded=expanded)


def _finish(
    domain: PddlDomain,
    problem: PddlProblem,
    parents: dict,
    state: frozenset[Atom],
    expanded: int,
) -> SolveResult:
    plan = _reconstruct(parents, state)
    check = validate_plan(domain, problem, plan)
    if not check.valid:  # planner-validator coherence is a hard contract
        raise AssertionError(f"planner produced an invalid plan: {check.reason}")
    return SolveResult(status="solved", plan=plan, expanded=expanded)
