"""Corpus-level BLEU-4 with brevity penalty.

Fixed policy, pinned by the oracle fixtures in the test suite:
  * tokenization splits on whitespace and isolates punctuation marks
    (`\\w+` runs and single non-word non-space characters);
  * modified n-gram precisions are pooled over the corpus, n = 1..4;
  * add-one smoothing on orders 2..4; the unigram precision is left raw so
    corpora sharing no tokens with their references score exactly 0.0;
  * brevity penalty exp(1 - r/c) when the candidate corpus is shorter.

Scores are percent-scaled.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Sequence

from ..errors import DataError

_TOKEN = re.compile(r"\w+|[^\w\s]")
MAX_ORDER = 4


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def _ngrams(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def corpus_bleu(predictions: Sequence[str], golds: Sequence[str]) -> float:
    """BLEU-4 over a parallel corpus of (prediction, single reference) pairs."""
    if len(predictions) != len(golds):
        raise DataError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(golds)}"
        )
    if not predictions:
        raise DataError("empty corpus")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    cand_len = 0
    ref_len = 0
    for prediction, gold in zip(predictions, golds):
        cand = tokenize(prediction)
        ref = tokenize(gold)
        cand_len += len(cand)
        ref_len += len(ref)
        for order in range(1, MAX_ORDER + 1):
            cand_counts = _ngrams(cand, order)
            ref_counts = _ngrams(ref, order)
            totals[order - 1] += sum(cand_counts.values())
            matches[order - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in cand_counts.items()
            )
    if cand_len == 0 or matches[0] == 0:
        return 0.0
    log_sum = math.log(matches[0] / totals[0])
    for order in range(2, MAX_ORDER + 1):
        log_sum += math.log((matches[order - 1] + 1) / (totals[order - 1] + 1))
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * brevity * math.exp(log_sum / MAX_ORDER)
