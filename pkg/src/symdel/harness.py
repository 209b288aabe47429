"""Pipeline front-end: validation, evolution, stage mixing, metric scoring,
delegated execution scoring, and report assembly.

All randomness flows from one root seed; per-task seeds are derived as
``root XOR sha256(task_name)[:8]``.  Identical config and inputs produce
byte-identical outputs (report metadata carries the config digest and tool
version, never timestamps).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import __version__, fol, rules
from .corpus import (
    Manifest,
    TaskSample,
    iterate_split,
    load_manifest,
    read_samples,
    validate_sample,
    write_samples,
)
from .errors import ConfigError, DataError
from .executors import ComparatorConfig, ExecutorSpec, compare_answers, extract_answer, run_external
from .metrics import score_task
from .metrics.core import NormalizationPolicy, Score
from .metrics.scoring import aggregate
from .mixer import (
    DEFAULT_RATIO,
    DEFAULT_SEPARATOR,
    build_infusion_set,
    build_injection_set,
    sample_infusion_subset,
    write_records,
)
from .pddl import parse_domain, parse_plan, parse_problem, solve, validate_plan
from .report import Report, TaskRow, build_report, render_report
from .symevol import evolve_dataset, save_map

ROUTING_KINDS = ("metric_only", "fol", "rules", "pddl", "external")
EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_EXECUTOR = 0, 2, 3, 4


def task_seed(root_seed: int, task: str) -> int:
    digest = hashlib.sha256(task.encode("utf-8")).digest()
    return root_seed ^ int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class Routing:
    kind: str
    domain_file: str | None = None  # pddl
    strategy: str = "bfs"  # pddl
    budget: int = 200_000  # pddl
    semantics: str = "closed"  # rules
    max_domain: int = 3  # fol
    executor: str | None = None  # external
    convention: str = "marker"  # external
    answer_field: str = "answer"  # external
    choice_mapping: bool = False  # external

    def __post_init__(self) -> None:
        if self.kind not in ROUTING_KINDS:
            raise ConfigError(f"unknown routing kind {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    manifest: str | None = None
    predictions: str | None = None
    values: str | None = None
    output_dir: str | None = None
    seed: int = 0
    ratio: float = DEFAULT_RATIO
    general: str | None = None
    separator: str = DEFAULT_SEPARATOR
    demo_policy: str = "include"
    evol_seeds: Mapping[str, int] = field(default_factory=dict)
    metric_overrides: Mapping[str, str] = field(default_factory=dict)
    normalizer: NormalizationPolicy = NormalizationPolicy()
    routing: Mapping[str, Routing] = field(default_factory=dict)
    executors: Mapping[str, ExecutorSpec] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: Mapping[str, object]) -> "RunConfig":
        known = {
            "manifest", "predictions", "values", "output_dir", "seed", "ratio",
            "general", "separator", "demo_policy", "evol_seeds", "metric_overrides",
            "normalizer", "routing", "executors",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {unknown}")
        try:
            normalizer = NormalizationPolicy(**raw.get("normalizer", {}))  # type: ignore[arg-type]
            routing = {
                task: Routing(**spec)  # type: ignore[arg-type]
                for task, spec in raw.get("routing", {}).items()  # type: ignore[union-attr]
            }
        except TypeError as exc:
            raise ConfigError(f"bad config field: {exc}") from exc
        executors = {
            name: ExecutorSpec(
                kind=spec.get("kind", "external_process"),
                command=tuple(spec.get("command", ())),
                timeout_s=float(spec.get("timeout_s", 10.0)),
                memory_mb=spec.get("memory_mb", 512),
                cpu_seconds=spec.get("cpu_seconds"),
                file_suffix=spec.get("file_suffix", ".py"),
            )
            for name, spec in raw.get("executors", {}).items()  # type: ignore[union-attr]
        }
        return cls(
            manifest=raw.get("manifest"),  # type: ignore[arg-type]
            predictions=raw.get("predictions"),  # type: ignore[arg-type]
            values=raw.get("values"),  # type: ignore[arg-type]
            output_dir=raw.get("output_dir"),  # type: ignore[arg-type]
            seed=int(raw.get("seed", 0)),  # type: ignore[arg-type]
            ratio=float(raw.get("ratio", DEFAULT_RATIO)),  # type: ignore[arg-type]
            general=raw.get("general"),  # type: ignore[arg-type]
            separator=str(raw.get("separator", DEFAULT_SEPARATOR)),
            demo_policy=str(raw.get("demo_policy", "include")),
            evol_seeds={k: int(v) for k, v in raw.get("evol_seeds", {}).items()},  # type: ignore[union-attr]
            metric_overrides=dict(raw.get("metric_overrides", {})),  # type: ignore[arg-type]
            normalizer=normalizer,
            routing=routing,
            executors=executors,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw)

    def digest(self) -> str:
        blob = json.dumps(
            {
                "manifest": self.manifest,
                "predictions": self.predictions,
                "values": self.values,
                "seed": self.seed,
                "ratio": self.ratio,
                "general": self.general,
                "separator": self.separator,
                "demo_policy": self.demo_policy,
                "evol_seeds": dict(sorted(self.evol_seeds.items())),
                "metric_overrides": dict(sorted(self.metric_overrides.items())),
                "routing": {t: vars(r) for t, r in sorted(self.routing.items())},
            },
            sort_keys=True,
            default=str,
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _meta(config: RunConfig) -> dict[str, str]:
    return {
        "config_digest": config.digest(),
        "seed": str(config.seed),
        "tool_version": __version__,
    }


def load_predictions(path: str | Path) -> dict[str, dict[str, str]]:
    """Predictions file: one JSON record per line with task, id, output."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"predictions file not found: {path}")
    out: dict[str, dict[str, str]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        for key in ("task", "id", "output"):
            if key not in raw:
                raise DataError(f"{path}:{lineno}: prediction record missing {key!r}")
        out.setdefault(str(raw["task"]), {})[str(raw["id"])] = str(raw["output"])
    return out


def load_values(path: str | Path) -> list[TaskRow]:
    """Aggregation-only input: TSV rows `task<TAB>domain<TAB>metric<TAB>value`."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"values file not found: {path}")
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 tab-separated cells, got {len(cells)}")
        try:
            value = float(cells[3])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad value {cells[3]!r}") from exc
        rows.append(TaskRow(task=cells[0], domain=cells[1], metric=cells[2], value=value))
    if not rows:
        raise DataError(f"values file {path} has no data rows")
    return rows


def _write_report(report: Report, output_dir: str | None) -> None:
    if output_dir is None:
        return
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.tsv").write_text(render_report(report, "delimited"), encoding="utf-8")
    (out / "report.txt").write_text(render_report(report, "plain_table"), encoding="utf-8")


def cmd_score(config: RunConfig) -> Report:
    """Metric scoring over the manifest's test splits, or aggregation-only
    when a per-task values file is supplied."""
    if config.values is not None:
        report = build_report(load_values(config.values), meta=_meta(config))
        _write_report(report, config.output_dir)
        return report
    if config.manifest is None or config.predictions is None:
        raise ConfigError("score needs --manifest and --predictions (or --values)")
    manifest = load_manifest(config.manifest)
    predictions = load_predictions(config.predictions)
    scores: dict[str, Score] = {}
    coverages: dict[str, float] = {}
    for spec in manifest.tasks:
        if "test" not in spec.splits:
            continue
        golds = {sample.id: sample for sample in iterate_split(manifest, spec.name, "test")}
        if not golds:
            continue
        task_predictions = predictions.get(spec.name, {})
        metric = config.metric_overrides.get(spec.name)
        scored_spec = spec if metric is None else _override_metric(spec, metric)
        scores[spec.name] = score_task(
            task_predictions,
            golds,
            scored_spec,
            normalizer=config.normalizer,
            smatch_seed=task_seed(config.seed, spec.name) % 2**32,
        )
        coverages[spec.name] = len(set(task_predictions) & set(golds)) / len(golds)
    if not scores:
        raise DataError("no scorable task (no test splits or no samples)")
    report = aggregate(scores, manifest, coverages)
    report = Report(
        rows=report.rows,
        domain_means=report.domain_means,
        overall=report.overall,
        meta=_meta(config),
    )
    _write_report(report, config.output_dir)
    return report


def _override_metric(spec, metric: str):
    from dataclasses import replace

    from .corpus import canonical_metric

    return replace(spec, metric=canonical_metric(metric))


def _delegate_fol(prediction: str, gold_label: str, routing: Routing) -> bool:
    premises = []
    conclusion = None
    for line in prediction.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.lower().startswith("conclusion:"):
            conclusion = line.split(":", 1)[1].strip()
        else:
            premises.append(line)
    if conclusion is None:
        return False
    try:
        theory = fol.theory([fol.parse_fol(p) for p in premises])
        result = fol.entails(
            theory, fol.parse_fol(conclusion), max_domain=routing.max_domain
        )
    except (DataError, fol.EnumerationBudgetError, ConfigError):
        return False
    if result.unsatisfiable:
        return False
    return result.verdict.value.casefold() == gold_label.strip().casefold()


def _delegate_rules(prediction: str, gold_label: str, routing: Routing) -> bool:
    try:
        program = rules.parse_program(prediction, semantics=routing.semantics)
        if not program.queries:
            return False
        closure = rules.forward_chain(program)
        verdict = rules.query(closure, program.queries[-1], semantics=routing.semantics)
    except DataError:
        return False
    return verdict.value.casefold() == gold_label.strip().casefold()


def _looks_like_plan(text: str) -> bool:
    lines = [l.split(";", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    return bool(lines) and all(l.startswith("(") and l.endswith(")") for l in lines)


def _delegate_pddl(prediction: str, sample: TaskSample, routing: Routing, domain) -> bool:
    try:
        gold_problem = parse_problem(sample.output, domain)
    except DataError as exc:
        raise DataError(f"sample {sample.id!r}: gold problem invalid: {exc}") from exc
    try:
        if _looks_like_plan(prediction):
            plan = parse_plan(prediction)
        else:
            predicted_problem = parse_problem(prediction, domain)
            result = solve(
                domain, predicted_problem, strategy=routing.strategy, budget=routing.budget
            )
            if result.status != "solved" or result.plan is None:
                return False
            plan = result.plan
    except DataError:
        return False
    return validate_plan(domain, gold_problem, plan).valid


def _delegate_external(
    prediction: str, sample: TaskSample, routing: Routing, spec: ExecutorSpec
) -> bool:
    if not prediction.strip():
        return False
    result = run_external(prediction, spec)
    if not result.ok:
        return False
    answer = extract_answer(result, convention=routing.convention)
    if answer is None:
        return False
    gold = sample.extra.get(routing.answer_field, sample.output)
    comparator = ComparatorConfig(choice_mapping=routing.choice_mapping)
    return bool(compare_answers(answer, str(gold), comparator))


def cmd_delegate(config: RunConfig) -> Report:
    """Route each task's generated symbolic forms through its solver and
    score the outcomes as accuracies."""
    if config.manifest is None or config.predictions is None:
        raise ConfigError("delegate needs --manifest and --predictions")
    if not config.routing:
        raise ConfigError("delegate needs a routing table in the config")
    manifest = load_manifest(config.manifest)
    predictions = load_predictions(config.predictions)
    known = {spec.name for spec in manifest.tasks}
    missing = sorted(set(config.routing) - known)
    if missing:
        raise ConfigError(f"routing references task(s) absent from manifest: {missing}")
    rows: list[TaskRow] = []
    for spec in manifest.tasks:
        routing = config.routing.get(spec.name)
        if routing is None:
            continue
        golds = {sample.id: sample for sample in iterate_split(manifest, spec.name, "test")}
        task_predictions = predictions.get(spec.name, {})
        domain = None
        if routing.kind == "pddl":
            if routing.domain_file is None:
                raise ConfigError(f"pddl routing for {spec.name!r} needs domain_file")
            domain_path = manifest.base_dir / routing.domain_file
            if not domain_path.exists():
                raise ConfigError(f"pddl domain file not found: {domain_path}")
            domain = parse_domain(domain_path.read_text(encoding="utf-8"))
        executor_spec = None
        if routing.kind == "external":
            if routing.executor is None or routing.executor not in config.executors:
                raise ConfigError(
                    f"external routing for {spec.name!r} needs an executor name "
                    "defined in the config"
                )
            executor_spec = config.executors[routing.executor]
        if routing.kind == "metric_only":
            score = score_task(task_predictions, golds, spec, normalizer=config.normalizer)
            value = score.value
            metric_label = spec.metric
        else:
            correct = 0
            for sample_id, sample in golds.items():
                prediction = task_predictions.get(sample_id)
                if prediction is None:
                    continue
                if routing.kind == "fol":
                    correct += _delegate_fol(prediction, sample.output, routing)
                elif routing.kind == "rules":
                    correct += _delegate_rules(prediction, sample.output, routing)
                elif routing.kind == "pddl":
                    correct += _delegate_pddl(prediction, sample, routing, domain)
                else:
                    correct += _delegate_external(prediction, sample, routing, executor_spec)
            value = 100.0 * correct / len(golds) if golds else 0.0
            metric_label = "Accuracy"
        coverage = (
            len(set(task_predictions) & set(golds)) / len(golds) if golds else 0.0
        )
        rows.append(
            TaskRow(
                task=spec.name,
                domain=spec.domain,
                metric=metric_label,
                value=value,
                count=len(golds),
                coverage=coverage,
            )
        )
    report = build_report(rows, meta=_meta(config))
    _write_report(report, config.output_dir)
    return report


def cmd_evolve(
    config: RunConfig, task: str, split: str = "train", length: int = 6
) -> dict[str, object]:
    """Evolve one split; writes the evolved split plus the sidecar map."""
    if config.manifest is None:
        raise ConfigError("evolve needs --manifest")
    if config.output_dir is None:
        raise ConfigError("evolve needs --out")
    manifest = load_manifest(config.manifest)
    spec = manifest.task(task)
    samples = list(iterate_split(manifest, task, split))
    seed = config.evol_seeds.get(task, task_seed(config.seed, task))
    evolved, symbol_map = evolve_dataset(samples, spec, seed=seed, length=length)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    split_path = out / f"{task}-{split}-evol.jsonl"
    map_path = out / f"{task}-{split}-evol.map.json"
    write_samples(evolved, split_path)
    save_map(symbol_map, map_path, source=task)
    summary = {
        "task": task,
        "split": split,
        "seed": seed,
        "samples": len(evolved),
        "symbols": len(symbol_map.mapping),
        "split_file": split_path.name,
        "map_file": map_path.name,
    }
    (out / f"{task}-{split}-evol.summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def cmd_mix(config: RunConfig, stage: str) -> dict[str, object]:
    """Build the injection or infusion record file plus a stage summary."""
    if config.manifest is None:
        raise ConfigError("mix needs --manifest")
    if config.output_dir is None:
        raise ConfigError("mix needs --out")
    if stage not in ("injection", "infusion"):
        raise ConfigError(f"unknown stage {stage!r}")
    manifest = load_manifest(config.manifest)
    evol_seeds = dict(config.evol_seeds)
    for spec in manifest.tasks:
        if spec.evolvable and spec.name not in evol_seeds:
            evol_seeds[spec.name] = task_seed(config.seed, spec.name)
    injection = build_injection_set(
        manifest, evol_seeds, separator=config.separator, demo_policy=config.demo_policy
    )
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    domains = {spec.name: spec.domain for spec in manifest.tasks}
    if stage == "injection":
        records = injection
    else:
        subset = sample_infusion_subset(injection, config.ratio, config.seed, domains)
        records = build_infusion_set(subset, config.general, shuffle_seed=config.seed)
    records_path = out / f"{stage}.jsonl"
    write_records(records, records_path)
    per_domain: dict[str, int] = {}
    per_origin: dict[str, int] = {}
    for record in records:
        per_origin[record.origin] = per_origin.get(record.origin, 0) + 1
        if record.origin != "general":
            domain = domains.get(record.task, "?")
            per_domain[domain] = per_domain.get(domain, 0) + 1
    summary: dict[str, object] = {
        "stage": stage,
        "records": len(records),
        "ratio": config.ratio if stage == "infusion" else 1.0,
        "seed": config.seed,
        "evol_seeds": dict(sorted(evol_seeds.items())),
        "per_domain": dict(sorted(per_domain.items())),
        "per_origin": dict(sorted(per_origin.items())),
        "records_file": records_path.name,
    }
    (out / f"{stage}.summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def cmd_validate(config: RunConfig) -> dict[str, object]:
    """Validate the manifest and every sample of every split.

    Collects all violations rather than stopping at the first.
    """
    if config.manifest is None:
        raise ConfigError("validate needs --manifest")
    manifest = load_manifest(config.manifest)
    violations: list[str] = []
    samples_checked = 0
    for spec in manifest.tasks:
        for split in spec.splits:
            seen: set[str] = set()
            try:
                for sample in read_samples(manifest.split_path(spec.name, split)):
                    samples_checked += 1
                    for violation in validate_sample(sample):
                        violations.append(
                            f"{spec.name}/{split}/{sample.id}: {violation}"
                        )
                    if sample.id in seen:
                        violations.append(
                            f"{spec.name}/{split}: duplicate sample id {sample.id!r}"
                        )
                    seen.add(sample.id)
            except DataError as exc:
                violations.append(f"{spec.name}/{split}: {exc}")
    return {
        "tasks": len(manifest.tasks),
        "samples": samples_checked,
        "violations": violations,
        "ok": not violations,
    }
