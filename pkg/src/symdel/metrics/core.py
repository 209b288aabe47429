"""Per-sample metrics: exact match and set-overlap F1."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Collection, Hashable

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizationPolicy:
    """Explicit normalization applied before exact-match comparison."""

    collapse_whitespace: bool = True
    casefold: bool = False
    strip: bool = True

    def apply(self, text: str) -> str:
        if self.strip:
            text = text.strip()
        if self.collapse_whitespace:
            text = _WS.sub(" ", text)
        if self.casefold:
            text = text.casefold()
        return text


DEFAULT_NORMALIZER = NormalizationPolicy()


@dataclass(frozen=True)
class Score:
    """Percent-scaled task score."""

    value: float
    count: int
    metric: str

    def __post_init__(self) -> None:
        if not (0.0 <= self.value <= 100.0):
            raise ValueError(f"score value out of range: {self.value}")
        if self.count < 0:
            raise ValueError("score count must be >= 0")


def exact_match(
    prediction: str, gold: str, normalizer: NormalizationPolicy = DEFAULT_NORMALIZER
) -> int:
    return int(normalizer.apply(prediction) == normalizer.apply(gold))


def set_f1(
    predicted: Collection[Hashable], gold: Collection[Hashable]
) -> tuple[float, float, float]:
    """Exact-overlap precision/recall/F1 over two sets.

    Empty intersections (including two empty sets) score (0, 0, 0).
    """
    predicted = set(predicted)
    gold = set(gold)
    hits = len(predicted & gold)
    precision = hits / len(predicted) if predicted else 0.0
    recall = hits / len(gold) if gold else 0.0
    if precision + recall == 0.0:
        return (precision, recall, 0.0)
    return (precision, recall, 2 * precision * recall / (precision + recall))


def triple_f1(
    predicted: Collection[tuple[str, str, str]], gold: Collection[tuple[str, str, str]]
) -> tuple[float, float, float]:
    return set_f1(predicted, gold)
