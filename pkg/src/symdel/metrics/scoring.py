"""Metric dispatch over a task's predictions plus report aggregation."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..corpus import Manifest, TaskSample, TaskSpec
from ..errors import DataError
from .. import fol
from ..report import Report, TaskRow, build_report
from .bleu import corpus_bleu
from .core import DEFAULT_NORMALIZER, NormalizationPolicy, Score, set_f1
from .amr import parse_amr, smatch


def logic_equivalence(prediction: str, gold: str, max_domain: int = 3) -> int:
    """1 iff the two formulas are equivalent under bounded-domain semantics.

    An unparseable prediction scores 0; an unparseable gold is a data fault
    and raises.  Engine budget overruns also score 0 so results stay
    deterministic.
    """
    try:
        gold_formula = fol.parse_fol(gold)
    except fol.FolParseError as exc:
        raise DataError(f"gold formula unparseable: {exc}") from exc
    try:
        pred_formula = fol.parse_fol(prediction)
    except fol.FolParseError:
        return 0
    try:
        return int(fol.equivalent(pred_formula, gold_formula, max_domain=max_domain))
    except (fol.EnumerationBudgetError, DataError):
        return 0


def parse_items(text: str) -> frozenset[tuple[str, ...]]:
    """Parse the documented triple/answer serialization into a set.

    Items are separated by newlines or semicolons.  An item containing pipes
    is a triple ``subject | relation | object``; otherwise the whole item is
    a single answer element (answer-set F1, WebQSP style).
    """
    items = []
    for chunk in text.replace(";", "\n").splitlines():
        chunk = chunk.strip()
        if not chunk:
            continue
        if "|" in chunk:
            items.append(tuple(part.strip() for part in chunk.split("|")))
        else:
            items.append((chunk,))
    return frozenset(items)


def _exact_match_value(
    predictions: Mapping[str, str],
    golds: Mapping[str, TaskSample],
    normalizer: NormalizationPolicy,
) -> float:
    hits = 0
    for sample_id, sample in golds.items():
        prediction = predictions.get(sample_id)
        if prediction is None:
            continue
        hits += int(normalizer.apply(prediction) == normalizer.apply(sample.output))
    return 100.0 * hits / len(golds)


def _per_sample_mean(values: Sequence[float], total: int) -> float:
    return 100.0 * sum(values) / total


def score_task(
    predictions: Mapping[str, str],
    golds: Mapping[str, TaskSample],
    spec: TaskSpec,
    normalizer: NormalizationPolicy = DEFAULT_NORMALIZER,
    smatch_restarts: int = 4,
    smatch_seed: int = 0,
    le_max_domain: int = 3,
) -> Score:
    """Dispatch on the task's metric; missing predictions score 0 and count.

    Per-sample metrics are averaged and percent-scaled; BLEU is corpus-level
    (missing predictions enter as empty candidates).
    """
    if not golds:
        raise DataError(f"task {spec.name!r}: no gold samples to score")
    metric = spec.metric
    if metric == "EM":
        value = _exact_match_value(predictions, golds, normalizer)
    elif metric == "BLEU":
        ids = list(golds)
        value = corpus_bleu(
            [predictions.get(i, "") for i in ids], [golds[i].output for i in ids]
        )
    elif metric == "Smatch":
        per_sample = []
        for sample_id, sample in golds.items():
            try:
                gold_graph = parse_amr(sample.output)
            except DataError as exc:
                raise DataError(
                    f"task {spec.name!r} sample {sample_id!r}: gold graph invalid: {exc}"
                ) from exc
            prediction = predictions.get(sample_id)
            if prediction is None:
                continue
            try:
                pred_graph = parse_amr(prediction)
            except DataError:
                continue
            per_sample.append(
                smatch(pred_graph, gold_graph, restarts=smatch_restarts, seed=smatch_seed)
            )
        value = _per_sample_mean(per_sample, len(golds))
    elif metric == "F1-triple":
        per_sample = []
        for sample_id, sample in golds.items():
            prediction = predictions.get(sample_id)
            if prediction is None:
                continue
            _, _, f1 = set_f1(parse_items(prediction), parse_items(sample.output))
            per_sample.append(f1)
        value = _per_sample_mean(per_sample, len(golds))
    elif metric == "LE":
        per_sample = []
        for sample_id, sample in golds.items():
            prediction = predictions.get(sample_id)
            if prediction is None:
                continue
            per_sample.append(
                logic_equivalence(prediction, sample.output, max_domain=le_max_domain)
            )
        value = _per_sample_mean(per_sample, len(golds))
    else:
        raise DataError(f"unsupported metric kind {metric!r}")
    return Score(value=value, count=len(golds), metric=metric)


def aggregate(
    scores: Mapping[str, Score],
    manifest: Manifest,
    coverages: Mapping[str, float] | None = None,
) -> Report:
    """Report rows in manifest order with unweighted domain and overall means."""
    unknown = sorted(set(scores) - {spec.name for spec in manifest.tasks})
    if unknown:
        raise DataError(f"scored task(s) not in manifest: {unknown}")
    coverages = coverages or {}
    rows = [
        TaskRow(
            task=spec.name,
            domain=spec.domain,
            metric=scores[spec.name].metric,
            value=scores[spec.name].value,
            count=scores[spec.name].count,
            coverage=coverages.get(spec.name, 1.0),
        )
        for spec in manifest.tasks
        if spec.name in scores
    ]
    return build_report(rows)
