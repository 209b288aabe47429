"""Two-stage training-set construction.

Injection stage: every symbolic train sample plus its evolved variant,
assembled into prompt/target records.  Infusion stage: a per-domain uniform
subsample of the injection set (ratio 0.3 by default) shuffled together with
general instruction data.

Prompt assembly concatenates instruction, optional rendered demos, a fixed
separator, then the input.  The exact byte layout is a repo convention
pinned by a golden file in the test suite.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Manifest, TaskSample, iterate_split
from .errors import DataError
from .symevol import evolve_dataset

DEFAULT_SEPARATOR = "\n\n"
DEFAULT_RATIO = 0.3
ORIGINS = ("symbolic", "evol", "general")


@dataclass(frozen=True)
class StageConfig:
    """Knobs for one stage build; Injection ignores general_data."""

    stage: str  # "injection" | "infusion"
    sample_ratio: float = DEFAULT_RATIO
    seed: int = 0
    general_data: str | None = None
    separator: str = DEFAULT_SEPARATOR

    def __post_init__(self) -> None:
        if self.stage not in ("injection", "infusion"):
            raise DataError(f"unknown stage {self.stage!r}")
        if not (0 < self.sample_ratio <= 1):
            raise DataError(f"sample_ratio must be in (0, 1], got {self.sample_ratio}")


@dataclass(frozen=True)
class SftRecord:
    prompt: str
    target: str
    task: str
    origin: str

    def to_json(self) -> str:
        return json.dumps(
            {"prompt": self.prompt, "target": self.target, "task": self.task, "origin": self.origin},
            ensure_ascii=False,
        )


def render_demos(demos: Sequence[tuple[str, str]]) -> str:
    return "\n".join(f"Input: {inp}\nOutput: {out}" for inp, out in demos)


def assemble_prompt(
    sample: TaskSample,
    separator: str = DEFAULT_SEPARATOR,
    demo_policy: str = "include",
    task: str = "",
    origin: str = "symbolic",
) -> SftRecord:
    """Build one prompt/target record: instruction, demos, separator, input.

    The separator must not occur in the assembled content; this keeps
    assembly injective on (instruction, demos, input) and guarantees the
    separator appears exactly once when the input is nonempty.
    """
    if demo_policy not in ("include", "exclude"):
        raise DataError(f"unknown demo policy {demo_policy!r}")
    if not sample.output:
        raise DataError(f"sample {sample.id!r}: empty output cannot form a target")
    block = sample.instruction
    if demo_policy == "include" and sample.demos:
        block = block + "\n" + render_demos(sample.demos)
    if sample.input:
        if separator in block or separator in sample.input:
            raise DataError(
                f"sample {sample.id!r}: separator {separator!r} occurs in content; "
                "choose a separator absent from the data"
            )
        prompt = block + separator + sample.input
    else:
        prompt = block
    if not prompt:
        raise DataError(f"sample {sample.id!r}: assembled prompt is empty")
    return SftRecord(prompt=prompt, target=sample.output, task=task, origin=origin)


def _test_split_ids(manifest: Manifest, task: str) -> set[str]:
    spec = manifest.task(task)
    if "test" not in spec.splits:
        return set()
    return {sample.id for sample in iterate_split(manifest, task, "test")}


def build_injection_set(
    manifest: Manifest,
    evol_seeds: Mapping[str, int],
    separator: str = DEFAULT_SEPARATOR,
    demo_policy: str = "include",
) -> list[SftRecord]:
    """Assemble the stage-1 set: originals plus evolved variants (a multiset union).

    Leakage guard: a train sample whose id also appears in the task's test
    split aborts the build.
    """
    records: list[SftRecord] = []
    for spec in manifest.tasks:
        if "train" not in spec.splits:
            continue
        samples = list(iterate_split(manifest, spec.name, "train"))
        leaked = {s.id for s in samples} & _test_split_ids(manifest, spec.name)
        if leaked:
            raise DataError(
                f"task {spec.name!r}: train ids leak into the test split: {sorted(leaked)[:5]}"
            )
        for sample in samples:
            records.append(
                assemble_prompt(sample, separator, demo_policy, task=spec.name, origin="symbolic")
            )
        if spec.evolvable:
            if spec.name not in evol_seeds:
                raise DataError(f"evolvable task {spec.name!r} has no seed")
            evolved, _ = evolve_dataset(samples, spec, seed=evol_seeds[spec.name])
            for sample in evolved:
                records.append(
                    assemble_prompt(sample, separator, demo_policy, task=spec.name, origin="evol")
                )
    return records


def round_half_up(value: Decimal) -> int:
    return int(value + Decimal("0.5"))


def domain_quota(ratio: float, count: int) -> int:
    """round(ratio * count) with half-up ties, computed in decimal so e.g.
    0.3 * 5 rounds to 2 rather than drifting on binary float error."""
    return round_half_up(Decimal(str(ratio)) * count)


def sample_infusion_subset(
    injection_set: Sequence[SftRecord],
    ratio: float,
    seed: int,
    domains: Mapping[str, str],
) -> list[SftRecord]:
    """Uniformly sample each task domain without replacement.

    Exactly round(ratio * n_d) records per domain d, selected by a per-domain
    generator derived from (seed, domain) so the draw is independent of
    domain iteration order.  Output preserves the input's record order.
    """
    if not injection_set:
        raise DataError("injection set is empty")
    if not (0 < ratio <= 1):
        raise DataError(f"ratio must be in (0, 1], got {ratio}")
    by_domain: dict[str, list[int]] = {}
    for index, record in enumerate(injection_set):
        if record.task not in domains:
            raise DataError(f"record task {record.task!r} has no resolvable domain")
        by_domain.setdefault(domains[record.task], []).append(index)
    chosen: set[int] = set()
    for domain in sorted(by_domain):
        indices = by_domain[domain]
        quota = domain_quota(ratio, len(indices))
        rng = random.Random(f"{seed}:{domain}")
        chosen.update(rng.sample(indices, quota))
    return [injection_set[i] for i in sorted(chosen)]


def read_records(path: str | Path) -> list[SftRecord]:
    records = []
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read record file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        for key in ("prompt", "target"):
            if not raw.get(key):
                raise DataError(f"{path}:{lineno}: record missing or empty {key!r}")
        origin = raw.get("origin", "general")
        if origin not in ORIGINS:
            raise DataError(f"{path}:{lineno}: unknown origin {origin!r}")
        records.append(
            SftRecord(
                prompt=str(raw["prompt"]),
                target=str(raw["target"]),
                task=str(raw.get("task", "")),
                origin=origin,
            )
        )
    return records


def write_records(records: Iterable[SftRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")


def build_infusion_set(
    subset: Sequence[SftRecord],
    general_path: str | Path | None,
    shuffle_seed: int,
) -> list[SftRecord]:
    """Shuffled concatenation of the symbolic subset and the general records."""
    general = read_records(general_path) if general_path else []
    combined = list(subset) + [
        SftRecord(prompt=r.prompt, target=r.target, task=r.task, origin="general")
        for r in general
    ]
    random.Random(shuffle_seed).shuffle(combined)
    return combined
