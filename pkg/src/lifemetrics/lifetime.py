"""Lifetime data model: experience records, blocks, regimes and log parsing.

A log is one JSON object per line::

    {"exp_num": 0, "block_num": 0, "block_type": "learn",
     "task_name": "nav", "task_params": {"weather": "fog"},
     "metrics": {"reward": 12.5}}

``lifetime_id`` and ``timestamp`` are optional.  CSV logs carry the same
columns with ``task_params`` and ``metrics`` as JSON-encoded cells.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

LEARN = "learn"
EVAL = "eval"
BLOCK_TYPES = (LEARN, EVAL)

REQUIRED_KEYS = ("exp_num", "block_num", "block_type", "task_name", "task_params", "metrics")


class LogFormatError(ValueError):
    """Raised for malformed or structurally invalid log input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def variant_label(params: dict | None) -> str:
    """Canonical label for a task's parameter dict; empty params give ``""``."""
    if not params:
        return ""
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True, order=True)
class TaskKey:
    task_name: str
    variant_label: str = ""

    def __post_init__(self):
        if not self.task_name:
            raise ValueError("task_name must be non-empty")

    @classmethod
    def from_params(cls, task_name: str, params: dict | None = None) -> "TaskKey":
        return cls(task_name, variant_label(params))

    @property
    def params(self) -> dict:
        return json.loads(self.variant_label) if self.variant_label else {}

    def __str__(self) -> str:
        if self.variant_label:
            return f"{self.task_name}{self.variant_label}"
        return self.task_name


@dataclass(frozen=True)
class ExperienceRecord:
    exp_num: int
    block_num: int
    block_type: str
    task: TaskKey
    metrics: dict
    lifetime_id: str = ""
    timestamp: object = None

    def value(self, key: str) -> float:
        return self.metrics[key]

    def to_dict(self) -> dict:
        out = {
            "exp_num": self.exp_num,
            "block_num": self.block_num,
            "block_type": self.block_type,
            "task_name": self.task.task_name,
            "task_params": self.task.params,
            "metrics": dict(self.metrics),
        }
        if self.lifetime_id:
            out["lifetime_id"] = self.lifetime_id
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out


@dataclass(frozen=True)
class Regime:
    task: TaskKey
    start_exp: int
    end_exp: int
    start: int  # record offsets into LifetimeLog.records, half-open
    stop: int


@dataclass(frozen=True)
class BlockInfo:
    block_num: int
    block_type: str
    tasks: tuple[TaskKey, ...]
    regimes: tuple[Regime, ...]
    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class LifetimeLog:
    lifetime_id: str
    records: tuple[ExperienceRecord, ...]
    blocks: tuple[BlockInfo, ...]
    perf_key: str

    @classmethod
    def from_records(cls, records: Sequence[ExperienceRecord], perf_key: str,
                     lifetime_id: str | None = None) -> "LifetimeLog":
        records = tuple(records)
        if not records:
            raise LogFormatError("log contains no experience records")
        _check_records(records, perf_key)
        if lifetime_id is None:
            lifetime_id = records[0].lifetime_id
        return cls(lifetime_id, records, segment(records), perf_key)

    def __len__(self) -> int:
        return len(self.records)

    def block_records(self, block: BlockInfo) -> tuple[ExperienceRecord, ...]:
        return self.records[block.start:block.stop]

    def values(self, key: str | None = None) -> np.ndarray:
        key = key or self.perf_key
        return np.array([r.metrics[key] for r in self.records], dtype=float)

    @property
    def tasks(self) -> list[TaskKey]:
        seen: dict[TaskKey, None] = {}
        for r in self.records:
            seen.setdefault(r.task, None)
        return list(seen)

    def learn_blocks(self) -> list[BlockInfo]:
        return [b for b in self.blocks if b.block_type == LEARN]

    def eval_blocks(self) -> list[BlockInfo]:
        return [b for b in self.blocks if b.block_type == EVAL]

    def with_values(self, values: Sequence[float], key: str | None = None) -> "LifetimeLog":
        """Copy of this log with ``key`` (default perf_key) replaced per record."""
        key = key or self.perf_key
        if len(values) != len(self.records):
            raise ValueError("one value per record required")
        records = tuple(
            replace(r, metrics={**r.metrics, key: float(v)})
            for r, v in zip(self.records, values)
        )
        return replace(self, records=records)


def segment(records: Sequence[ExperienceRecord]) -> tuple[BlockInfo, ...]:
    """Group records into blocks by block_num and blocks into regimes."""
    blocks = []
    start = 0
    n = len(records)
    while start < n:
        stop = start
        num = records[start].block_num
        while stop < n and records[stop].block_num == num:
            stop += 1
        regimes = []
        i = start
        while i < stop:
            j = i
            while j < stop and records[j].task == records[i].task:
                j += 1
            regimes.append(Regime(records[i].task, records[i].exp_num, records[j - 1].exp_num, i, j))
            i = j
        tasks = tuple(dict.fromkeys(r.task for r in records[start:stop]))
        blocks.append(BlockInfo(num, records[start].block_type, tasks, tuple(regimes), start, stop))
        start = stop
    return tuple(blocks)


def _check_records(records: Sequence[ExperienceRecord], perf_key: str, lines: Sequence[int] | None = None):
    block_types: dict[int, str] = {}
    prev = None
    for i, rec in enumerate(records):
        line = lines[i] if lines is not None else None
        if perf_key not in rec.metrics:
            raise LogFormatError(f"missing perf_key {perf_key!r}", line)
        if rec.block_type not in BLOCK_TYPES:
            raise LogFormatError(f"block_type must be 'learn' or 'eval', got {rec.block_type!r}", line)
        if prev is not None:
            if rec.exp_num <= prev.exp_num:
                raise LogFormatError(f"exp_num {rec.exp_num} does not increase (previous {prev.exp_num})", line)
            if rec.block_num < prev.block_num:
                raise LogFormatError(f"block_num regression {prev.block_num} -> {rec.block_num}", line)
        known = block_types.setdefault(rec.block_num, rec.block_type)
        if known != rec.block_type:
            raise LogFormatError(f"mixed block_type in block {rec.block_num}", line)
        prev = rec


def _as_int(raw, name: str, line: int) -> int:
    if isinstance(raw, bool):
        raise LogFormatError(f"{name} must be an integer", line)
    if isinstance(raw, float) and raw.is_integer():
        raw = int(raw)
    if isinstance(raw, str):
        try:
            raw = int(raw)
        except ValueError:
            raise LogFormatError(f"{name} must be an integer, got {raw!r}", line) from None
    if not isinstance(raw, int) or raw < 0:
        raise LogFormatError(f"{name} must be a non-negative integer, got {raw!r}", line)
    return raw


def record_from_dict(obj: dict, line: int, default_lifetime: str = "") -> ExperienceRecord:
    if not isinstance(obj, dict):
        raise LogFormatError("record is not a JSON object", line)
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise LogFormatError(f"missing keys: {', '.join(missing)}", line)
    name = obj["task_name"]
    if not isinstance(name, str) or not name:
        raise LogFormatError("task_name must be a non-empty string", line)
    params = obj["task_params"]
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise LogFormatError("task_params must be an object", line)
    metrics = obj["metrics"]
    if not isinstance(metrics, dict) or not metrics:
        raise LogFormatError("metrics must be a non-empty object", line)
    clean = {}
    for k, v in metrics.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise LogFormatError(f"metric {k!r} is not a number", line)
        if not math.isfinite(v):
            raise LogFormatError(f"metric {k!r} is not finite", line)
        clean[str(k)] = float(v)
    return ExperienceRecord(
        exp_num=_as_int(obj["exp_num"], "exp_num", line),
        block_num=_as_int(obj["block_num"], "block_num", line),
        block_type=obj["block_type"],
        task=TaskKey.from_params(name, params),
        metrics=clean,
        lifetime_id=str(obj.get("lifetime_id") or default_lifetime),
        timestamp=obj.get("timestamp"),
    )


def _text_lines(stream) -> Iterator[str]:
    if isinstance(stream, (bytes, bytearray)):
        stream = io.StringIO(bytes(stream).decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def _build(pairs: Iterable[tuple[int, dict]], perf_key: str, lifetime_id: str | None) -> LifetimeLog:
    records, lines = [], []
    for line, obj in pairs:
        records.append(record_from_dict(obj, line, lifetime_id or ""))
        lines.append(line)
    if not records:
        raise LogFormatError("log contains no experience records")
    _check_records(records, perf_key, lines)
    lid = lifetime_id if lifetime_id is not None else records[0].lifetime_id
    return LifetimeLog(lid, tuple(records), segment(records), perf_key)


def parse_log(stream: IO | str | bytes, perf_key: str, lifetime_id: str | None = None) -> LifetimeLog:
    """Parse a JSON-lines log into a validated, segmented LifetimeLog.

    ``stream`` may be a text or binary file object, or the log content itself.
    Blank lines are skipped; any other undecodable line raises
    :class:`LogFormatError` carrying its 1-based line number.
    """
    def pairs():
        for n, line in enumerate(_text_lines(stream), start=1):
            if not line.strip():
                continue
            try:
                yield n, json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"malformed JSON ({exc.msg})", n) from None

    return _build(pairs(), perf_key, lifetime_id)


def parse_csv(stream: IO | str | bytes, perf_key: str, lifetime_id: str | None = None) -> LifetimeLog:
    def pairs():
        reader = csv.DictReader(_text_lines(stream))
        for row in reader:
            n = reader.line_num
            obj = dict(row)
            for key in ("task_params", "metrics"):
                cell = obj.get(key)
                if cell is None:
                    continue
                try:
                    obj[key] = json.loads(cell) if cell.strip() else {}
                except json.JSONDecodeError:
                    raise LogFormatError(f"{key} cell is not valid JSON", n) from None
            ts = obj.get("timestamp")
            if ts == "":
                obj.pop("timestamp")
            yield n, obj

    return _build(pairs(), perf_key, lifetime_id)


def read_log(path: str | Path, perf_key: str, lifetime_id: str | None = None) -> LifetimeLog:
    """Read a log file; ``.csv`` files go through the CSV reader."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        if path.suffix.lower() == ".csv":
            log = parse_csv(fh, perf_key, lifetime_id)
        else:
            log = parse_log(fh, perf_key, lifetime_id)
    if not log.lifetime_id:
        log = replace(log, lifetime_id=path.stem)
    return log


def dumps_log(log: LifetimeLog) -> str:
    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in log.records]
    return "\n".join(lines) + "\n"


def write_log(log: LifetimeLog, path: str | Path) -> None:
    Path(path).write_text(dumps_log(log), encoding="utf-8")


def task_series(log: LifetimeLog, task: TaskKey, block_type: str,
                perf_key: str | None = None) -> list[tuple[int, np.ndarray]]:
    """Per block of ``block_type``, the ordered values of ``task``'s experiences."""
    if block_type not in BLOCK_TYPES:
        raise ValueError(f"unknown block_type {block_type!r}")
    if task not in log.tasks:
        raise KeyError(f"task {task} does not occur in the log")
    key = perf_key or log.perf_key
    out = []
    for block in log.blocks:
        if block.block_type != block_type or task not in block.tasks:
            continue
        vals = [r.metrics[key] for r in log.block_records(block) if r.task == task]
        out.append((block.block_num, np.array(vals, dtype=float)))
    return out


def learning_curve(log: LifetimeLog, task: TaskKey, perf_key: str | None = None) -> np.ndarray:
    """All learning-block values of ``task`` concatenated in lifetime order."""
    parts = [v for _, v in task_series(log, task, LEARN, perf_key)] if task in log.tasks else []
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


@dataclass
class ValidationReport:
    lifetime_id: str
    findings: list[str] = field(default_factory=list)
    computable: dict[str, bool] = field(default_factory=dict)
    reasons: dict[str, list[str]] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"lifetime {self.lifetime_id or '<unnamed>'}"]
        out += [f"finding: {f}" for f in self.findings]
        for name, ok in self.computable.items():
            state = "computable" if ok else "not computable"
            why = "; ".join(self.reasons.get(name, []))
            out.append(f"{name}: {state}" + (f" ({why})" if why else ""))
        return out

    def to_dict(self) -> dict:
        return {
            "lifetime_id": self.lifetime_id,
            "findings": list(self.findings),
            "computable": dict(self.computable),
            "reasons": {k: list(v) for k, v in self.reasons.items()},
        }


def validate(log: LifetimeLog) -> ValidationReport:
    """Structural findings and per-metric eligibility for a parsed log."""
    # deferred: metric modules import this one
    from . import metrics, supplemental

    report = ValidationReport(log.lifetime_id)
    learned, evaluated = set(), set()
    for block in log.blocks:
        (learned if block.block_type == LEARN else evaluated).update(block.tasks)
        if block.block_type == LEARN:
            for task in block.tasks:
                n = sum(1 for r in log.block_records(block) if r.task == task)
                if n < 2:
                    report.findings.append(
                        f"block {block.block_num}: task {task} has {n} LX (terminal performance degenerate)")
    all_tasks = log.tasks
    for task in all_tasks:
        if task not in learned:
            report.findings.append(f"task {task} is never learned")
        if task not in evaluated:
            report.findings.append(f"task {task} is never evaluated")
    if evaluated:
        for block in log.eval_blocks():
            absent = [str(t) for t in all_tasks if t not in block.tasks]
            if absent:
                report.findings.append(f"eval block {block.block_num} missing tasks: {', '.join(absent)}")
    else:
        report.findings.append("no evaluation blocks")

    pm = metrics.maintenance_observations(log)
    report.computable["PM"] = bool(pm)
    report.reasons["PM"] = ["PM computable"] if pm else ["no task has a later evaluation after its post-learning evaluation"]

    ft = metrics.forward_transfer_occurrences(log)
    pairs = sorted({(str(o.source), str(o.target)) for o in ft})
    report.computable["FT"] = bool(pairs)
    report.reasons["FT"] = [f"FT computable for pair {a}->{b}" for a, b in pairs] or [
        "no task evaluated before and after another task's learning block while still unlearned"]

    bt = metrics.backward_transfer_occurrences(log)
    pairs = sorted({(str(o.source), str(o.target)) for o in bt})
    report.computable["BT"] = bool(pairs)
    report.reasons["BT"] = [f"BT computable for pair {a}->{b}" for a, b in pairs] or [
        "no learned task evaluated on both sides of another task's learning block"]

    has_learning = bool(learned)
    for name in ("RP", "SE"):
        report.computable[name] = has_learning
        report.reasons[name] = ["requires single-task-expert curves for each learned task"] if has_learning else [
            "no learning blocks"]
    report.computable["CG"] = has_learning
    report.reasons["CG"] = [] if has_learning else ["no learning blocks"]
    n_learn = len(log.learn_blocks())
    report.computable["LB"] = n_learn >= 2
    report.reasons["LB"] = [] if n_learn >= 2 else ["needs at least two learning blocks"]
    pr = supplemental.recovery_eligible_tasks(log)
    report.computable["PR"] = bool(pr)
    report.reasons["PR"] = [f"PR computable for task {t}" for t in pr] or [
        "no task has three or more learning blocks"]
    return report
