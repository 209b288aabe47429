"""Symbol-evol: rewrite a task's defined symbol tokens with random strings.

A task's symbol vocabulary (action commands, function names, ...) is mapped
through a seeded bijection onto fresh replacement strings, and every
occurrence in instruction, input, output, and demos is rewritten at token
boundaries.  One map is shared by all samples of a task so the renamed
symbol system stays internally consistent.  Both the instruction-side
definitions and the output-side occurrences are rewritten (interpretation
noted in the README).
"""

from __future__ import annotations

import json
import random
import re
import string
from dataclasses import dataclass, replace as _dc_replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import TaskSample, TaskSpec
from .errors import DataError

ALNUM = string.ascii_letters + string.digits
DEFAULT_LENGTH = 6
EVOL_ID_SUFFIX = "::evol"
_MAX_RETRIES = 100

# A token matches only when flanked by non-identifier characters or string
# edges; required so e.g. TURN never fires inside TURN_LEFT.
_IDENT = r"A-Za-z0-9_"


@dataclass(frozen=True)
class SymbolVocabulary:
    """Ordered set of symbol tokens extracted from one task."""

    tokens: tuple[str, ...]
    source: str


@dataclass(frozen=True)
class SymbolMap:
    """Seeded bijection original token -> replacement string."""

    mapping: dict[str, str]
    seed: int
    alphabet: str = ALNUM
    length: int = DEFAULT_LENGTH

    def __post_init__(self) -> None:
        originals = list(self.mapping)
        replacements = list(self.mapping.values())
        if len(set(replacements)) != len(replacements):
            raise DataError("symbol map is not injective: replacement collision")
        overlap = set(replacements) & set(originals)
        if overlap:
            raise DataError(f"replacement equals an original token: {sorted(overlap)}")

    def inverse(self) -> "SymbolMap":
        return SymbolMap(
            mapping={v: k for k, v in self.mapping.items()},
            seed=self.seed,
            alphabet=self.alphabet,
            length=self.length,
        )


def extract_vocabulary(task: TaskSpec, samples: Sequence[TaskSample]) -> SymbolVocabulary:
    """Collect the task's declared symbols in first-occurrence order.

    The convention is either an explicit token list on the TaskSpec or a
    marker regex (one capture group) applied to each sample's instruction.
    """
    if task.symbols is not None:
        tokens = list(dict.fromkeys(task.symbols))
    elif task.symbol_pattern is not None:
        pattern = re.compile(task.symbol_pattern)
        tokens = list(
            dict.fromkeys(
                match.group(1) if pattern.groups else match.group(0)
                for sample in samples
                for match in pattern.finditer(sample.instruction)
            )
        )
    else:
        raise DataError(f"task {task.name!r} declares no symbol convention")
    if not tokens:
        raise DataError(f"task {task.name!r}: no symbols found")
    return SymbolVocabulary(tokens=tuple(tokens), source=task.name)


def generate_map(
    vocab: SymbolVocabulary,
    seed: int,
    length: int = DEFAULT_LENGTH,
    alphabet: str = ALNUM,
    forbidden_texts: Iterable[str] = (),
) -> SymbolMap:
    """Draw a fresh replacement for every vocabulary token.

    Deterministic: identical (vocab, seed, length, alphabet) always yields an
    identical map.  A candidate replacement is rejected and redrawn if it
    collides with an original token, another replacement, or any pre-existing
    text in `forbidden_texts` (bounded to 100 retries per token).
    """
    headroom = len(set(alphabet)) ** length
    if headroom < 10 * len(vocab.tokens):
        raise DataError(
            f"alphabet^length = {headroom} gives insufficient collision headroom "
            f"for {len(vocab.tokens)} tokens (need >= {10 * len(vocab.tokens)})"
        )
    forbidden = tuple(forbidden_texts)
    originals = set(vocab.tokens)
    rng = random.Random(seed)
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for token in vocab.tokens:
        for _ in range(_MAX_RETRIES):
            candidate = "".join(rng.choice(alphabet) for _ in range(length))
            if candidate in originals or candidate in used:
                continue
            if any(candidate in text for text in forbidden):
                continue
            mapping[token] = candidate
            used.add(candidate)
            break
        else:
            raise DataError(
                f"could not draw a collision-free replacement for {token!r} "
                f"after {_MAX_RETRIES} retries"
            )
    return SymbolMap(mapping=mapping, seed=seed, alphabet=alphabet, length=length)


def _compiled(mapping: dict[str, str]) -> re.Pattern[str]:
    # Longest-first alternation so overlapping originals resolve deterministically.
    ordered = sorted(mapping, key=len, reverse=True)
    body = "|".join(re.escape(tok) for tok in ordered)
    return re.compile(rf"(?<![{_IDENT}])(?:{body})(?![{_IDENT}])")


def rewrite_text(text: str, symbol_map: SymbolMap) -> str:
    """Replace every boundary-delimited token occurrence in one pass."""
    if not symbol_map.mapping:
        return text
    pattern = _compiled(symbol_map.mapping)
    return pattern.sub(lambda m: symbol_map.mapping[m.group(0)], text)


def apply_map(
    sample: TaskSample, symbol_map: SymbolMap, id_suffix: str = EVOL_ID_SUFFIX
) -> TaskSample:
    """Rewrite one sample; all text outside matched tokens is byte-identical."""
    if not symbol_map.mapping:
        return _dc_replace(sample, id=sample.id + id_suffix)
    pattern = _compiled(symbol_map.mapping)
    sub = lambda text: pattern.sub(lambda m: symbol_map.mapping[m.group(0)], text)
    return TaskSample(
        id=sample.id + id_suffix,
        instruction=sub(sample.instruction),
        input=sub(sample.input),
        output=sub(sample.output),
        demos=tuple((sub(i), sub(o)) for i, o in sample.demos),
        extra=sample.extra,
    )


def evolve_dataset(
    samples: Sequence[TaskSample],
    task: TaskSpec,
    seed: int,
    length: int = DEFAULT_LENGTH,
    alphabet: str = ALNUM,
) -> tuple[tuple[TaskSample, ...], SymbolMap]:
    """Evolve a whole split under one shared map.

    Output count equals input count.  Replacements are screened against every
    piece of text in the split so a fresh symbol never collides with
    pre-existing content.
    """
    if not task.evolvable:
        raise DataError(f"task {task.name!r} is not evolvable")
    vocab = extract_vocabulary(task, samples)
    corpus_texts = [
        text
        for sample in samples
        for text in (
            sample.instruction,
            sample.input,
            sample.output,
            *(part for demo in sample.demos for part in demo),
        )
    ]
    symbol_map = generate_map(
        vocab, seed=seed, length=length, alphabet=alphabet, forbidden_texts=corpus_texts
    )
    evolved = tuple(apply_map(sample, symbol_map) for sample in samples)
    return evolved, symbol_map


def save_map(symbol_map: SymbolMap, path: str | Path, source: str = "") -> None:
    """Write the audit sidecar: originals, replacements, seed, alphabet, length."""
    doc = {
        "source": source,
        "seed": symbol_map.seed,
        "alphabet": symbol_map.alphabet,
        "length": symbol_map.length,
        "mapping": symbol_map.mapping,
    }
    Path(path).write_text(
        json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def load_map(path: str | Path) -> SymbolMap:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return SymbolMap(
        mapping=dict(doc["mapping"]),
        seed=int(doc["seed"]),
        alphabet=str(doc["alphabet"]),
        length=int(doc["length"]),
    )
