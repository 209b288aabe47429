"""Shared fixture builders: tiny corpora written to tmp dirs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from symdel.corpus import Manifest, load_manifest


def sample_dict(
    sample_id: str,
    instruction: str = "Do the task.",
    input_text: str = "",
    output: str = "ok",
    demos: list | None = None,
    **extra,
) -> dict:
    record = {
        "id": sample_id,
        "instruction": instruction,
        "input": input_text,
        "output": output,
        "demos": demos or [],
    }
    record.update(extra)
    return record


def write_jsonl(path: Path, records: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def build_corpus(root: Path, tasks: list[dict], version: str = "1") -> Path:
    """Write split files plus manifest.json under root; returns manifest path.

    Each task dict: name, domain, metric, splits: {split: [sample dicts]},
    plus optional symbols/symbol_pattern/access/symbolic_form.
    """
    manifest_tasks = []
    for task in tasks:
        entry = {
            "name": task["name"],
            "domain": task["domain"],
            "metric": task["metric"],
            "symbolic_form": task.get("symbolic_form", task["metric"].lower()),
            "splits": {},
            "access": task.get("access", "Direct"),
        }
        for split, records in task["splits"].items():
            rel = f"data/{task['name']}-{split}.jsonl"
            write_jsonl(root / rel, records)
            entry["splits"][split] = rel
        for key in ("symbols", "symbol_pattern", "notes"):
            if key in task:
                entry[key] = task[key]
        manifest_tasks.append(entry)
    manifest_path = root / "manifest.json"
    manifest_path.write_text(
        json.dumps({"version": version, "tasks": manifest_tasks}, indent=2) + "\n",
        encoding="utf-8",
    )
    return manifest_path


SCAN_SYMBOLS = ["I_TURN_RIGHT", "I_TURN_LEFT", "I_WALK", "I_JUMP", "I_RUN"]

SCAN_INSTRUCTION = (
    "Translate the command into the action sequence. Defined actions: "
    + ", ".join(SCAN_SYMBOLS)
    + "."
)


def scan_samples(count: int = 6, split: str = "train") -> list[dict]:
    actions = [
        "I_TURN_RIGHT I_WALK",
        "I_TURN_LEFT I_TURN_LEFT I_RUN",
        "I_JUMP",
        "I_WALK I_WALK I_TURN_RIGHT",
        "I_RUN I_JUMP I_TURN_LEFT",
        "I_TURN_RIGHT I_TURN_RIGHT",
    ]
    commands = [
        "walk right",
        "run after turning left twice",
        "jump",
        "walk twice then turn right",
        "run, jump, turn left",
        "turn right twice",
    ]
    return [
        sample_dict(
            f"{split}-{i}",
            instruction=SCAN_INSTRUCTION,
            input_text=commands[i % 6],
            output=actions[i % 6],
            demos=[[commands[(i + 1) % 6], actions[(i + 1) % 6]]],
        )
        for i in range(count)
    ]


@pytest.fixture
def scan_corpus(tmp_path: Path) -> Manifest:
    manifest_path = build_corpus(
        tmp_path,
        [
            {
                "name": "scan",
                "domain": "Command",
                "metric": "EM",
                "symbolic_form": "action sequence",
                "access": "Direct+Evol",
                "symbols": SCAN_SYMBOLS,
                "splits": {
                    "train": scan_samples(6, "train"),
                    "test": scan_samples(3, "test"),
                },
            }
        ],
    )
    return load_manifest(manifest_path)


# The 34-task/12-domain layout used by the published-results fixtures.
TASKS34: list[tuple[str, str, str, str]] = [
    ("Blocksworld", "Planning", "BLEU", "Direct+Evol"),
    ("Termes", "Planning", "BLEU", "Direct+Evol"),
    ("Floortile", "Planning", "BLEU", "Direct+Evol"),
    ("Grippers", "Planning", "BLEU", "Direct+Evol"),
    ("Spider", "SQL", "EM", "Direct"),
    ("Sparc", "SQL", "EM", "Direct"),
    ("Cosql", "SQL", "EM", "Direct"),
    ("WebQSP", "KG/DB", "F1", "Direct"),
    ("GrailQA", "KG/DB", "EM", "Direct"),
    ("CompWebQ", "KG/DB", "EM", "Direct"),
    ("AMR3.0", "AMR", "Smatch", "Direct"),
    ("AMR2.0", "AMR", "Smatch", "Direct"),
    ("BioAMR", "AMR", "Smatch", "Direct"),
    ("Tekgen", "Ontology", "F1", "Direct"),
    ("Webnlg", "Ontology", "F1", "Direct"),
    ("MTOP", "API", "EM", "Direct"),
    ("TOPv2", "API", "EM", "Direct"),
    ("NLmaps", "API", "EM", "Direct"),
    ("SCAN", "Command", "EM", "Direct+Evol"),
    ("NL2BASH", "Code", "BLEU", "Direct"),
    ("NL2RX", "Code", "BLEU", "Direct"),
    ("NL2Python", "Code", "BLEU", "Direct"),
    ("NL2Java", "Code", "BLEU", "Direct"),
    ("NL2Go", "Code", "BLEU", "Direct"),
    ("FOLIO", "FOL", "LE", "Direct"),
    ("MALLS", "FOL", "LE", "Direct"),
    ("LogicNLI", "FOL", "LE", "Direct"),
    ("GQA", "Visual", "EM", "Direct"),
    ("CLEVR", "Visual", "EM", "Direct+Evol"),
    ("Geometry3k", "Visual", "EM", "Direct"),
    ("GSM8K-Code", "Math", "BLEU", "GPT-4"),
    ("AQUA-Code", "Math", "BLEU", "GPT-4"),
    ("MATH-Code", "Math", "BLEU", "GPT-4"),
    ("CheBi-20", "AI4Science", "EM", "Direct"),
]


def _toy_output(metric: str, index: int) -> str:
    if metric == "Smatch":
        return f"instance(a, act{index}); instance(b, thing); arg0(a, b)"
    if metric == "F1":
        return f"s{index} | rel | o{index}"
    if metric == "LE":
        return f"forall x (P{index}(x) -> Q(x))"
    if metric == "BLEU":
        return f"step one ; step two ; finish {index}"
    return f"answer {index}"


@pytest.fixture
def manifest34(tmp_path: Path) -> Manifest:
    tasks = []
    for name, domain, metric, access in TASKS34:
        tasks.append(
            {
                "name": name,
                "domain": domain,
                "metric": metric,
                "access": access,
                "splits": {
                    "test": [
                        sample_dict(
                            f"{name}-{i}",
                            instruction=f"Produce the {metric} form.",
                            input_text=f"query {i}",
                            output=_toy_output(metric, i),
                        )
                        for i in range(2)
                    ]
                },
            }
        )
    return load_manifest(build_corpus(tmp_path, tasks))
