"""Symbolic-task data model: samples, task specs, and dataset manifests.

A manifest is a single JSON document describing every task (name, domain,
metric, symbolic form, split files, provenance).  Sample files are JSONL,
one record per line, UTF-8, newline-terminated:

    {"id": ..., "instruction": ..., "input": ..., "output": ..., "demos": [[in, out], ...]}

Unknown extra fields on sample records are preserved opaquely and written
back on serialization.  All loaded values are immutable; manifests and
samples are safe to share across concurrent readers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import DataError

DOMAINS = (
    "Planning",
    "SQL",
    "KG/DB",
    "AMR",
    "Ontology",
    "API",
    "Command",
    "Code",
    "FOL",
    "Visual",
    "Math",
    "AI4Science",
)

METRIC_KINDS = ("EM", "BLEU", "Smatch", "F1-triple", "LE")

# Table-style spellings accepted in manifests.
_METRIC_ALIASES = {"F1": "F1-triple", "F1Triple": "F1-triple", "SMATCH": "Smatch"}

_SAMPLE_FIELDS = ("id", "instruction", "input", "output", "demos")


def canonical_metric(name: str) -> str:
    metric = _METRIC_ALIASES.get(name, name)
    if metric not in METRIC_KINDS:
        raise DataError(f"unknown metric {name!r}; expected one of {METRIC_KINDS}")
    return metric


@dataclass(frozen=True)
class TaskSample:
    """One instruction/input/output record with optional in-context demos."""

    id: str
    instruction: str
    input: str
    output: str
    demos: tuple[tuple[str, str], ...] = ()
    extra: Mapping[str, object] = field(default_factory=dict)

    def to_json(self) -> str:
        record: dict[str, object] = {
            "id": self.id,
            "instruction": self.instruction,
            "input": self.input,
            "output": self.output,
            "demos": [list(pair) for pair in self.demos],
        }
        for key, value in self.extra.items():
            record[key] = value
        return json.dumps(record, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "TaskSample":
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"sample line is not valid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise DataError("sample line is not a JSON object")
        missing = [k for k in _SAMPLE_FIELDS if k != "demos" and k not in record]
        if missing:
            raise DataError(f"sample record missing fields {missing}")
        demos_raw = record.get("demos", [])
        if not isinstance(demos_raw, list) or any(
            not (isinstance(d, list) and len(d) == 2) for d in demos_raw
        ):
            raise DataError("sample 'demos' must be a list of [input, output] pairs")
        extra = {k: v for k, v in record.items() if k not in _SAMPLE_FIELDS}
        return cls(
            id=str(record["id"]),
            instruction=str(record["instruction"]),
            input=str(record["input"]),
            output=str(record["output"]),
            demos=tuple((str(i), str(o)) for i, o in demos_raw),
            extra=extra,
        )


def validate_sample(sample: TaskSample) -> list[str]:
    """Return every invariant violation (empty list means the sample is ok).

    Violations are data, not faults: nothing is raised.
    """
    violations = []
    if not sample.id:
        violations.append("id empty")
    if not sample.output:
        violations.append("output empty")
    if (sample.input, sample.output) in sample.demos:
        violations.append("self-demo leak: demos contain the sample's own (input, output)")
    return violations


@dataclass(frozen=True)
class TaskSpec:
    """Declaration of one text-to-symbol task inside a manifest."""

    name: str
    domain: str
    metric: str
    symbolic_form: str
    splits: Mapping[str, str]
    access: str = "Direct"
    symbols: tuple[str, ...] | None = None
    symbol_pattern: str | None = None
    notes: str = ""

    @property
    def evolvable(self) -> bool:
        return self.symbols is not None or self.symbol_pattern is not None


@dataclass(frozen=True)
class Manifest:
    """Validated collection of task specs plus split-file resolution root."""

    tasks: tuple[TaskSpec, ...]
    version: str
    base_dir: Path = field(compare=False, default=Path("."))

    def task(self, name: str) -> TaskSpec:
        for spec in self.tasks:
            if spec.name == name:
                return spec
        raise DataError(f"unknown task {name!r}")

    def split_path(self, task: str, split: str) -> Path:
        spec = self.task(task)
        if split not in spec.splits:
            raise DataError(f"task {task!r} has no split {split!r}")
        return self.base_dir / spec.splits[split]

    def domains(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for spec in self.tasks:
            seen.setdefault(spec.domain, None)
        return tuple(seen)


def _parse_task(raw: object, index: int) -> TaskSpec:
    if not isinstance(raw, dict):
        raise DataError(f"tasks[{index}] is not an object")
    name = raw.get("name")
    if not name or not isinstance(name, str):
        raise DataError(f"tasks[{index}]: missing or empty 'name'")
    for key in ("domain", "metric", "symbolic_form", "splits"):
        if key not in raw:
            raise DataError(f"task {name!r}: missing field {key!r}")
    domain = raw["domain"]
    if domain not in DOMAINS:
        raise DataError(f"task {name!r}: unknown domain {domain!r}; expected one of {DOMAINS}")
    metric = canonical_metric(str(raw["metric"]))
    splits = raw["splits"]
    if not isinstance(splits, dict) or not splits:
        raise DataError(f"task {name!r}: 'splits' must be a non-empty object")
    symbols = raw.get("symbols")
    if symbols is not None:
        if not isinstance(symbols, list) or any(not isinstance(s, str) for s in symbols):
            raise DataError(f"task {name!r}: 'symbols' must be a list of strings")
        symbols = tuple(symbols)
    return TaskSpec(
        name=name,
        domain=domain,
        metric=metric,
        symbolic_form=str(raw["symbolic_form"]),
        splits={str(k): str(v) for k, v in splits.items()},
        access=str(raw.get("access", "Direct")),
        symbols=symbols,
        symbol_pattern=raw.get("symbol_pattern"),
        notes=str(raw.get("notes", "")),
    )


def load_manifest(path: str | Path) -> Manifest:
    """Load and fully validate a manifest document.

    Every TaskSpec invariant is checked here: domain and metric come from the
    closed sets, task names are unique, every split path resolves, and each
    declared domain (when the document carries a "domains" list) has at least
    one task.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "tasks" not in doc:
        raise DataError("manifest must be an object with a 'tasks' array")
    tasks = tuple(_parse_task(raw, i) for i, raw in enumerate(doc["tasks"]))
    seen: set[str] = set()
    for spec in tasks:
        if spec.name in seen:
            raise DataError(f"duplicate task name {spec.name!r}")
        seen.add(spec.name)
    base_dir = path.parent
    for spec in tasks:
        for split, rel in spec.splits.items():
            if not (base_dir / rel).exists():
                raise DataError(
                    f"task {spec.name!r}: split {split!r} path does not resolve: {rel}"
                )
    declared = doc.get("domains")
    if declared is not None:
        present = {spec.domain for spec in tasks}
        for domain in declared:
            if domain not in DOMAINS:
                raise DataError(f"declared domain {domain!r} is not a known domain label")
            if domain not in present:
                raise DataError(f"declared domain {domain!r} has no task")
    return Manifest(tasks=tasks, version=str(doc.get("version", "1")), base_dir=base_dir)


def manifest_to_doc(manifest: Manifest) -> dict:
    tasks = []
    for spec in manifest.tasks:
        raw: dict[str, object] = {
            "name": spec.name,
            "domain": spec.domain,
            "metric": spec.metric,
            "symbolic_form": spec.symbolic_form,
            "splits": dict(spec.splits),
            "access": spec.access,
        }
        if spec.symbols is not None:
            raw["symbols"] = list(spec.symbols)
        if spec.symbol_pattern is not None:
            raw["symbol_pattern"] = spec.symbol_pattern
        if spec.notes:
            raw["notes"] = spec.notes
        tasks.append(raw)
    return {"version": manifest.version, "tasks": tasks}


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    """Write the manifest back out; load(save(m)) == m (round-trip stable)."""
    path = Path(path)
    path.write_text(
        json.dumps(manifest_to_doc(manifest), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def read_samples(path: str | Path) -> Iterator[TaskSample]:
    """Stream samples from a JSONL file in stored order."""
    path = Path(path)
    try:
        handle = path.open(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read sample file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield TaskSample.from_json(line)
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc


def write_samples(samples: Sequence[TaskSample], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(sample.to_json() + "\n")


def iterate_split(manifest: Manifest, task: str, split: str) -> Iterator[TaskSample]:
    """Yield the samples of one split in stored order.

    Deterministic: identical inputs produce identical sequences.  Every
    yielded sample has passed validate_sample, and ids are unique within the
    (task, split); a violating record aborts the stream with a DataError
    naming it.
    """
    path = manifest.split_path(task, split)
    seen_ids: set[str] = set()
    for sample in read_samples(path):
        violations = validate_sample(sample)
        if violations:
            raise DataError(
                f"task {task!r} split {split!r} sample {sample.id!r}: "
                + "; ".join(violations)
            )
        if sample.id in seen_ids:
            raise DataError(
                f"task {task!r} split {split!r}: duplicate sample id {sample.id!r}"
            )
        seen_ids.add(sample.id)
        yield sample


def with_suffix_id(sample: TaskSample, suffix: str) -> TaskSample:
    return replace(sample, id=sample.id + suffix)
