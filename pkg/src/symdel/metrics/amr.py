"""Smatch: triple F-score between two rooted variable graphs.

The score is 2M / (|T_p| + |T_g|) where M is the number of predicted
triples that land in the gold set under the best injective variable
alignment found.  Graphs with at most 6 variables on both sides are scored
by exhaustive alignment; larger graphs fall back to seeded greedy
hill-climbing with random restarts (result is a lower bound on the true
optimum, deterministic under the seed).

Graphs arrive either as a triple list (documented serialization:
``instance(b, boy); arg0(w, b); top(w)``) or, when the text starts with
"(", through a minimal PENMAN adapter covering nodes, edges, and
attributes.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass

from ..errors import DataError

INSTANCE = "instance"
EXHAUSTIVE_VAR_LIMIT = 6
DEFAULT_RESTARTS = 4


@dataclass(frozen=True)
class AmrGraph:
    triples: tuple[tuple[str, str, str], ...]
    variables: frozenset[str]
    root: str


def amr_graph(
    triples: list[tuple[str, str, str]] | tuple[tuple[str, str, str], ...],
    root: str | None = None,
) -> AmrGraph:
    """Validate and freeze a graph: one instance triple per variable, root declared."""
    triples = tuple((str(s), str(r), str(t)) for s, r, t in triples)
    if not triples:
        raise DataError("graph has no triples")
    instance_sources = [s for s, r, _ in triples if r == INSTANCE]
    variables = frozenset(instance_sources)
    if len(instance_sources) != len(variables):
        dupes = sorted(
            {v for v in variables if instance_sources.count(v) > 1}
        )
        raise DataError(f"variable(s) with more than one instance triple: {dupes}")
    if not variables:
        raise DataError("graph declares no variables (no instance triples)")
    if root is None:
        root = instance_sources[0]
    if root not in variables:
        raise DataError(f"root {root!r} is not a declared variable")
    return AmrGraph(triples=triples, variables=variables, root=root)


_ITEM = re.compile(r"([A-Za-z_][\w.-]*)\s*\(\s*([^,()]+?)\s*,\s*(\"[^\"]*\"|[^,()]+?)\s*\)")
_SINGLE = re.compile(r"top\s*\(\s*([^,()\s]+)\s*\)")


def parse_triples(text: str) -> AmrGraph:
    """Parse the triple-list serialization (``rel(src, tgt)`` items)."""
    root = None
    top = _SINGLE.search(text)
    if top:
        root = top.group(1)
        text = text[: top.start()] + text[top.end() :]
    triples = []
    consumed = 0
    for match in _ITEM.finditer(text):
        rel, src, tgt = match.group(1), match.group(2), match.group(3)
        if tgt.startswith('"') and tgt.endswith('"'):
            tgt = tgt[1:-1]
        triples.append((src, rel, tgt))
        consumed += 1
    leftovers = _ITEM.sub("", text).replace(";", "").strip()
    if leftovers:
        raise DataError(f"unparseable graph text near {leftovers[:40]!r}")
    if not triples:
        raise DataError("no triples found in graph text")
    return amr_graph(triples, root=root)


_PENMAN_TOKEN = re.compile(r"\(|\)|/|:[^\s()]+|\"[^\"]*\"|[^\s()\/]+")


def parse_penman(text: str) -> AmrGraph:
    """Minimal PENMAN ingestion: nodes, edges, attributes; no alignment markup."""
    tokens = _PENMAN_TOKEN.findall(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise DataError("unexpected end of PENMAN text")
        token = tokens[pos]
        if expected is not None and token != expected:
            raise DataError(f"expected {expected!r}, found {token!r}")
        pos += 1
        return token

    declared: set[str] = set()
    raw: list[tuple[str, str, str]] = []

    def node() -> str:
        take("(")
        var = take()
        take("/")
        concept = take()
        if var in declared:
            raise DataError(f"variable {var!r} declared twice")
        declared.add(var)
        raw.append((var, INSTANCE, concept))
        while peek() not in (")", None):
            role = take()
            if not role.startswith(":"):
                raise DataError(f"expected a :role token, found {role!r}")
            if peek() == "(":
                target = node()
            else:
                target = take()
                if target.startswith('"') and target.endswith('"'):
                    target = target[1:-1]
            raw.append((var, role[1:], target))
        take(")")
        return var

    root = node()
    if pos != len(tokens):
        raise DataError(f"trailing PENMAN content at token {tokens[pos]!r}")
    return amr_graph(raw, root=root)


def parse_amr(text: str) -> AmrGraph:
    text = text.strip()
    if not text:
        raise DataError("empty graph text")
    if text.startswith("("):
        return parse_penman(text)
    return parse_triples(text)


def _tagged(graph: AmrGraph) -> list[tuple[object, str, object]]:
    # Namespace endpoints so a constant can never collide with a variable name.
    def tag(endpoint: str) -> object:
        return ("v", endpoint) if endpoint in graph.variables else ("c", endpoint)

    return [(tag(s), r, tag(t)) for s, r, t in graph.triples]


def _match_count(
    pred_triples: list[tuple[object, str, object]],
    gold_set: set[tuple[object, str, object]],
    mapping: dict[str, str | None],
) -> int:
    def image(endpoint: object) -> object | None:
        kind, name = endpoint  # type: ignore[misc]
        if kind == "c":
            return endpoint
        mapped = mapping.get(name)
        return None if mapped is None else ("v", mapped)

    count = 0
    for source, relation, target in pred_triples:
        s = image(source)
        t = image(target)
        if s is not None and t is not None and (s, relation, t) in gold_set:
            count += 1
    return count


def _score(match: int, n_pred: int, n_gold: int) -> float:
    return 2.0 * match / (n_pred + n_gold) if (n_pred + n_gold) else 0.0


def exhaustive_best_match(prediction: AmrGraph, gold: AmrGraph) -> int:
    """Exact optimum by enumerating every maximal injective variable mapping."""
    pred_triples = _tagged(prediction)
    gold_set = set(_tagged(gold))
    pvars = sorted(prediction.variables)
    gvars = sorted(gold.variables)
    best = 0
    if len(pvars) <= len(gvars):
        for images in itertools.permutations(gvars, len(pvars)):
            mapping = dict(zip(pvars, images))
            best = max(best, _match_count(pred_triples, gold_set, mapping))
    else:
        for sources in itertools.permutations(pvars, len(gvars)):
            mapping: dict[str, str | None] = {v: None for v in pvars}
            mapping.update(zip(sources, gvars))
            best = max(best, _match_count(pred_triples, gold_set, mapping))
    return best


def _concepts(graph: AmrGraph) -> dict[str, str]:
    return {s: t for s, r, t in graph.triples if r == INSTANCE}


def _heuristic_mapping(prediction: AmrGraph, gold: AmrGraph) -> dict[str, str | None]:
    # Pair variables whose concepts agree, greedily in sorted order.
    pred_concepts = _concepts(prediction)
    gold_by_concept: dict[str, list[str]] = {}
    for var, concept in sorted(_concepts(gold).items()):
        gold_by_concept.setdefault(concept, []).append(var)
    mapping: dict[str, str | None] = {}
    for var in sorted(prediction.variables):
        pool = gold_by_concept.get(pred_concepts.get(var, ""), [])
        mapping[var] = pool.pop(0) if pool else None
    leftovers = [g for pool in gold_by_concept.values() for g in pool]
    for var in sorted(prediction.variables):
        if mapping[var] is None and leftovers:
            mapping[var] = leftovers.pop(0)
    return mapping


def _random_mapping(
    pvars: list[str], gvars: list[str], rng: random.Random
) -> dict[str, str | None]:
    images: list[str | None] = list(gvars)
    if len(images) < len(pvars):
        images += [None] * (len(pvars) - len(images))
    rng.shuffle(images)
    return dict(zip(pvars, images[: len(pvars)]))


def hill_climb_best_match(
    prediction: AmrGraph,
    gold: AmrGraph,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> int:
    """Greedy steepest-ascent search over move/swap neighbors, with restarts."""
    if restarts < 1:
        raise DataError("restarts must be >= 1")
    pred_triples = _tagged(prediction)
    gold_set = set(_tagged(gold))
    pvars = sorted(prediction.variables)
    gvars = sorted(gold.variables)
    rng = random.Random(seed)
    best = 0
    for restart in range(restarts):
        if restart == 0:
            mapping = _heuristic_mapping(prediction, gold)
        else:
            mapping = _random_mapping(pvars, gvars, rng)
        current = _match_count(pred_triples, gold_set, mapping)
        improved = True
        while improved:
            improved = False
            best_move: tuple[str, str | None] | None = None
            best_gain_count = current
            owner = {g: v for v, g in mapping.items() if g is not None}
            for var in pvars:
                for target in [*gvars, None]:
                    if mapping[var] == target:
                        continue
                    trial = dict(mapping)
                    if target is not None and target in owner and owner[target] != var:
                        trial[owner[target]] = mapping[var]
                    trial[var] = target
                    count = _match_count(pred_triples, gold_set, trial)
                    if count > best_gain_count:
                        best_gain_count = count
                        best_move = (var, target)
            if best_move is not None:
                var, target = best_move
                owner = {g: v for v, g in mapping.items() if g is not None}
                if target is not None and target in owner and owner[target] != var:
                    mapping[owner[target]] = mapping[var]
                mapping[var] = target
                current = best_gain_count
                improved = True
        best = max(best, current)
    return best


def smatch(
    prediction: AmrGraph,
    gold: AmrGraph,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    method: str = "auto",
) -> float:
    """F-score in [0, 1] under the best variable alignment found.

    method "auto" substitutes exhaustive search whenever both graphs have at
    most 6 variables, so desk-scale scores are exact.
    """
    n_pred = len(prediction.triples)
    n_gold = len(gold.triples)
    if method not in ("auto", "exhaustive", "hillclimb"):
        raise DataError(f"unknown smatch method {method!r}")
    small = (
        len(prediction.variables) <= EXHAUSTIVE_VAR_LIMIT
        and len(gold.variables) <= EXHAUSTIVE_VAR_LIMIT
    )
    if method == "exhaustive" or (method == "auto" and small):
        matched = exhaustive_best_match(prediction, gold)
    else:
        matched = hill_climb_best_match(prediction, gold, restarts=restarts, seed=seed)
    return _score(matched, n_pred, n_gold)
