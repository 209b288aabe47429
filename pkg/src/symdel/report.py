"""Score report: per-task rows, per-domain means, overall mean.

Domain and overall means are unweighted: a domain's mean averages its task
values, and the overall mean averages all task values (not the domain
means).  Two renderings exist: a plain table grouped into domain blocks
with a final "Average Performance" row, and a delimited (TSV) form that
parses back to an identical Report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DataError


@dataclass(frozen=True)
class TaskRow:
    task: str
    domain: str
    metric: str
    value: float
    count: int = 0
    coverage: float = 1.0


@dataclass(frozen=True)
class Report:
    rows: tuple[TaskRow, ...]
    domain_means: tuple[tuple[str, float], ...]
    overall: float
    meta: Mapping[str, str] = field(default_factory=dict)


def build_report(rows: Sequence[TaskRow], meta: Mapping[str, str] | None = None) -> Report:
    """Aggregate task rows; domain order follows first appearance."""
    if not rows:
        raise DataError("cannot build a report from zero rows")
    by_domain: dict[str, list[float]] = {}
    for row in rows:
        by_domain.setdefault(row.domain, []).append(row.value)
    domain_means = tuple(
        (domain, sum(values) / len(values)) for domain, values in by_domain.items()
    )
    overall = sum(row.value for row in rows) / len(rows)
    return Report(
        rows=tuple(rows),
        domain_means=domain_means,
        overall=overall,
        meta=dict(meta or {}),
    )


def render_report(report: Report, format: str = "plain_table") -> str:
    if format == "plain_table":
        return _render_plain(report)
    if format == "delimited":
        return _render_delimited(report)
    raise DataError(f"unknown report format {format!r}")


def _render_plain(report: Report) -> str:
    width_task = max([len(r.task) for r in report.rows] + [len("Average Performance")])
    width_domain = max([len(r.domain) for r in report.rows] + [6])
    lines = [
        f"{'Domain':<{width_domain}}  {'Task':<{width_task}}  {'Metric':<9} "
        f"{'Value':>8}  {'Count':>6}  {'Coverage':>8}"
    ]
    domain_means = dict(report.domain_means)
    current: str | None = None
    for row in report.rows:
        label = row.domain if row.domain != current else ""
        if current is not None and row.domain != current:
            lines.append(
                f"{'':<{width_domain}}  {'(' + current + ' mean)':<{width_task}}  "
                f"{'':<9} {domain_means[current]:>8.2f}"
            )
        current = row.domain
        lines.append(
            f"{label:<{width_domain}}  {row.task:<{width_task}}  {row.metric:<9} "
            f"{row.value:>8.2f}  {row.count:>6}  {row.coverage:>8.2f}"
        )
    if current is not None:
        lines.append(
            f"{'':<{width_domain}}  {'(' + current + ' mean)':<{width_task}}  "
            f"{'':<9} {domain_means[current]:>8.2f}"
        )
    lines.append(
        f"{'':<{width_domain}}  {'Average Performance':<{width_task}}  {'':<9} "
        f"{report.overall:>8.2f}"
    )
    return "\n".join(lines) + "\n"


def _render_delimited(report: Report) -> str:
    lines = []
    for key in sorted(report.meta):
        lines.append(f"meta\t{key}\t{report.meta[key]}")
    for row in report.rows:
        lines.append(
            "task\t"
            + "\t".join(
                [row.task, row.domain, row.metric, repr(row.value), str(row.count), repr(row.coverage)]
            )
        )
    for domain, value in report.domain_means:
        lines.append(f"domain\t{domain}\t{value!r}")
    lines.append(f"overall\t{report.overall!r}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> Report:
    """Inverse of the delimited rendering; values round-trip exactly."""
    rows: list[TaskRow] = []
    domain_means: list[tuple[str, float]] = []
    overall: float | None = None
    meta: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        kind = cells[0]
        try:
            if kind == "meta":
                meta[cells[1]] = cells[2]
            elif kind == "task":
                rows.append(
                    TaskRow(
                        task=cells[1],
                        domain=cells[2],
                        metric=cells[3],
                        value=float(cells[4]),
                        count=int(cells[5]),
                        coverage=float(cells[6]),
                    )
                )
            elif kind == "domain":
                domain_means.append((cells[1], float(cells[2])))
            elif kind == "overall":
                overall = float(cells[1])
            else:
                raise DataError(f"line {lineno}: unknown row kind {kind!r}")
        except (IndexError, ValueError) as exc:
            raise DataError(f"line {lineno}: malformed report row: {exc}") from exc
    if overall is None or not rows:
        raise DataError("report text lacks task rows or the overall row")
    return Report(
        rows=tuple(rows), domain_means=tuple(domain_means), overall=overall, meta=meta
    )
