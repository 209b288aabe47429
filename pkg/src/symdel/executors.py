"""Sandboxed execution of generated program text plus answer comparison.

Each run gets a fresh temporary working directory, a minimal environment,
its own process group, and (on POSIX) address-space/CPU rlimits.  Statuses:
``ok`` (exit 0), ``nonzero_exit``, ``timeout`` (wall clock), and
``resource_kill`` (died on a signal, which covers rlimit kills).  Temp
artifacts are removed afterwards.  This is OS-level isolation, not a
container: generated code is untrusted, so the configured runtime should
itself be trusted.
"""

from __future__ import annotations

import math
import os
import re
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .errors import DataError, ExecutorError

try:
    import resource
except ImportError:  # non-POSIX
    resource = None  # type: ignore[assignment]

TIMEOUT_GRACE_S = 1.0
STATUSES = ("ok", "nonzero_exit", "timeout", "resource_kill")


@dataclass(frozen=True)
class ExecutorSpec:
    kind: str = "external_process"  # "external_process" | "builtin"
    command: tuple[str, ...] = ()
    timeout_s: float = 10.0
    memory_mb: int | None = 512
    cpu_seconds: int | None = None
    file_suffix: str = ".py"

    def __post_init__(self) -> None:
        if self.kind not in ("external_process", "builtin"):
            raise ExecutorError(f"unknown executor kind {self.kind!r}")
        if self.timeout_s <= 0:
            raise ExecutorError("timeout must be positive")
        if self.kind == "external_process":
            if not self.command:
                raise ExecutorError("external executor needs a command template")
            if not any("{file}" in part for part in self.command):
                raise ExecutorError("command template must contain a {file} placeholder")


@dataclass(frozen=True)
class ExecutionResult:
    status: str
    stdout: str
    stderr: str
    elapsed: float

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _limits(spec: ExecutorSpec):
    if resource is None:
        return None

    def apply() -> None:
        os.setsid()
        if spec.memory_mb is not None:
            cap = spec.memory_mb * 1024 * 1024
            resource.setrlimit(resource.RLIMIT_AS, (cap, cap))
        cpu = spec.cpu_seconds
        if cpu is None:
            # Wall timeout should fire first; CPU cap is the backstop.
            cpu = max(1, math.ceil(spec.timeout_s) * 2 + 1)
        resource.setrlimit(resource.RLIMIT_CPU, (cpu, cpu + 1))

    return apply


def run_external(program: str, spec: ExecutorSpec) -> ExecutionResult:
    """Write the program to a fresh temp file and run it under the template."""
    if not program:
        raise DataError("program text is empty")
    if spec.kind != "external_process":
        raise ExecutorError("run_external requires an external_process spec")
    workdir = tempfile.mkdtemp(prefix="symdel-exec-")
    started = time.monotonic()
    try:
        program_path = os.path.join(workdir, "program" + spec.file_suffix)
        with open(program_path, "w", encoding="utf-8") as handle:
            handle.write(program)
        command = [part.replace("{file}", program_path) for part in spec.command]
        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": workdir,
            "LANG": "C.UTF-8",
            "PYTHONIOENCODING": "utf-8",
        }
        try:
            process = subprocess.Popen(
                command,
                cwd=workdir,
                env=env,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                preexec_fn=_limits(spec),
            )
        except FileNotFoundError as exc:
            raise ExecutorError(f"executable not found: {command[0]!r}") from exc
        try:
            stdout, stderr = process.communicate(timeout=spec.timeout_s)
        except subprocess.TimeoutExpired:
            _kill_group(process)
            stdout, stderr = process.communicate()
            return ExecutionResult(
                status="timeout",
                stdout=stdout or "",
                stderr=stderr or "",
                elapsed=time.monotonic() - started,
            )
        elapsed = time.monotonic() - started
        if process.returncode == 0:
            status = "ok"
        elif process.returncode < 0:
            status = "resource_kill"
        else:
            status = "nonzero_exit"
        return ExecutionResult(status=status, stdout=stdout, stderr=stderr, elapsed=elapsed)
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def _kill_group(process: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(process.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        process.kill()


def extract_answer(
    result: ExecutionResult, convention: str = "marker", marker: str = "ANSWER:"
) -> str | None:
    """Pull the candidate answer out of stdout; None when there is nothing.

    Conventions: "last_line", "marker" (last line starting with the marker),
    "full_stdout".  Callers should check result.ok first; a missing answer is
    scored incorrect.
    """
    text = result.stdout
    if convention == "full_stdout":
        return text.strip() or None
    if convention == "last_line":
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        return lines[-1] if lines else None
    if convention == "marker":
        answer = None
        for line in text.splitlines():
            line = line.strip()
            if line.startswith(marker):
                answer = line[len(marker) :].strip()
        return answer or None
    raise DataError(f"unknown answer convention {convention!r}")


@dataclass(frozen=True)
class ComparatorConfig:
    numeric_rel_tol: float = 1e-4
    numeric_abs_tol: float = 1e-8
    casefold: bool = True
    collapse_whitespace: bool = True
    strip_punctuation: str = ".,;:!?"
    choice_mapping: bool = False

    def __post_init__(self) -> None:
        if self.numeric_rel_tol < 0 or self.numeric_abs_tol < 0:
            raise DataError("tolerances must be >= 0")


_NUMBER = re.compile(r"[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?([eE][+-]?\d+)?")
_CHOICE = re.compile(r"[\(\[]?([A-Ea-e])[\)\].:]?")
_WS = re.compile(r"\s+")


def _as_number(text: str) -> float | None:
    candidate = text.strip().rstrip(".")
    for prefix in ("$",):
        if candidate.startswith(prefix):
            candidate = candidate[len(prefix) :]
    if candidate.endswith("%"):
        candidate = candidate[:-1]
    if not _NUMBER.fullmatch(candidate.strip()):
        return None
    try:
        return float(candidate.replace(",", ""))
    except ValueError:
        return None


def _normalize(text: str, config: ComparatorConfig) -> str:
    text = text.strip()
    if config.collapse_whitespace:
        text = _WS.sub(" ", text)
    if config.casefold:
        text = text.casefold()
    return text.strip(config.strip_punctuation + " ")


def numbers_close(a: float, b: float, config: ComparatorConfig) -> bool:
    return abs(a - b) <= max(
        config.numeric_rel_tol * max(abs(a), abs(b)), config.numeric_abs_tol
    )


def compare_answers(
    candidate: str, gold: str, config: ComparatorConfig = ComparatorConfig()
) -> int:
    """1 iff the answers agree: numerically within tolerance when both parse
    as numbers, else by normalized string equality (with optional
    multiple-choice letter mapping)."""
    a = _as_number(candidate)
    b = _as_number(gold)
    if a is not None and b is not None:
        return int(numbers_close(a, b, config))
    left = _normalize(candidate, config)
    right = _normalize(gold, config)
    if config.choice_mapping:
        lm = _CHOICE.fullmatch(candidate.strip())
        rm = _CHOICE.fullmatch(gold.strip())
        if lm:
            left = lm.group(1).lower()
        if rm:
            right = rm.group(1).lower()
    return int(left == right)
