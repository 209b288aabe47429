"""Scoring functions for text-to-symbol generation plus aggregation."""

from .core import NormalizationPolicy, Score, exact_match, set_f1, triple_f1
from .bleu import corpus_bleu, tokenize
from .amr import AmrGraph, amr_graph, parse_amr, smatch
from .scoring import aggregate, logic_equivalence, score_task

__all__ = [
    "AmrGraph",
    "NormalizationPolicy",
    "Score",
    "aggregate",
    "amr_graph",
    "corpus_bleu",
    "exact_match",
    "logic_equivalence",
    "parse_amr",
    "score_task",
    "set_f1",
    "smatch",
    "tokenize",
    "triple_f1",
]
