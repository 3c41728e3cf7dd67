"""Block summaries and the evaluation-based metrics: PM, FT and BT."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lifetime import EVAL, LEARN, LifetimeLog, TaskKey

METRIC_NAMES = {
    "PM": "Performance Maintenance",
    "FT": "Forward Transfer",
    "BT": "Backward Transfer",
    "RP": "Relative Performance",
    "SE": "Sample Efficiency",
    "PR": "Performance Recovery",
    "CG": "Cumulative Gain",
    "LB": "Learn Burn",
}
METRIC_ORDER = tuple(METRIC_NAMES)


class UndefinedContrastError(ZeroDivisionError):
    pass


@dataclass
class MetricResult:
    """One metric for one lifetime.

    ``value`` is the mean of ``sub_values`` whenever any exist; otherwise it is
    None and the first note gives the reason.  ``extras`` carries series that
    do not enter the lifetime value (later transfer values, per-task means,
    ratio annotations).
    """

    name: str
    value: float | None = None
    sub_values: list[tuple[str, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    extras: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    @property
    def defined(self) -> bool:
        return self.value is not None

    @classmethod
    def from_sub_values(cls, name: str, sub_values, notes=None, extras=None,
                        undefined_reason: str = "no eligible values") -> "MetricResult":
        sub_values = [(str(k), float(v)) for k, v in sub_values]
        notes = list(notes or [])
        if sub_values:
            value = float(np.mean([v for _, v in sub_values]))
        else:
            value = None
            notes.insert(0, f"undefined: {undefined_reason}")
        return cls(name, value, sub_values, notes, dict(extras or {}))

    @classmethod
    def undefined(cls, name: str, reason: str, notes=None) -> "MetricResult":
        return cls(name, None, [], [f"undefined: {reason}", *(notes or [])], {})

    @property
    def reason(self) -> str | None:
        if self.defined:
            return None
        for note in self.notes:
            if note.startswith("undefined: "):
                return note[len("undefined: "):]
        return "undefined"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "sub_values": [[k, v] for k, v in self.sub_values],
            "notes": list(self.notes),
            "extras": {k: [[a, b] for a, b in v] for k, v in sorted(self.extras.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricResult":
        return cls(
            data["name"],
            data["value"],
            [(k, v) for k, v in data["sub_values"]],
            list(data["notes"]),
            {k: [(a, b) for a, b in v] for k, v in data.get("extras", {}).items()},
        )


def contrast(a: float, b: float) -> float:
    """Normalized difference ``(a - b) / (a + b)``."""
    total = a + b
    if total == 0:
        raise UndefinedContrastError(f"contrast undefined for a + b = 0 (a={a}, b={b})")
    return (a - b) / total


def ratio(a: float, b: float) -> float | None:
    return None if b == 0 else a / b


def tlp_window(n: int) -> int:
    # integer ceil: float 0.1 * n overshoots for n = 30, 70, ...
    return max(1, -(-n // 10))


def terminal_learning_performance(values) -> float:
    """Mean of the final tenth (rounded up, at least one) of a block's values."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("terminal learning performance of an empty block")
    return float(np.mean(x[-tlp_window(x.size):]))


def evaluation_performance(values) -> float:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("evaluation performance of an empty block")
    return float(np.mean(x))


@dataclass(frozen=True)
class BlockSummary:
    block_num: int
    block_type: str
    index: int  # position in LifetimeLog.blocks
    counts: dict[TaskKey, int]
    tlp: dict[TaskKey, float]
    eval_perf: dict[TaskKey, float]


def block_summaries(log: LifetimeLog) -> list[BlockSummary]:
    key = log.perf_key
    out = []
    for i, block in enumerate(log.blocks):
        per_task: dict[TaskKey, list[float]] = {}
        for r in log.block_records(block):
            per_task.setdefault(r.task, []).append(r.metrics[key])
        counts = {t: len(v) for t, v in per_task.items()}
        if block.block_type == LEARN:
            tlp = {t: terminal_learning_performance(v) for t, v in per_task.items()}
            ev = {}
        else:
            tlp = {}
            ev = {t: evaluation_performance(v) for t, v in per_task.items()}
        out.append(BlockSummary(block.block_num, block.block_type, i, counts, tlp, ev))
    return out


# --- Performance Maintenance -------------------------------------------------

@dataclass(frozen=True)
class MaintenanceObservation:
    task: TaskKey
    block_num: int
    reference_block: int
    value: float | None = None


def maintenance_observations(log: LifetimeLog, summaries=None) -> list[MaintenanceObservation]:
    """Maintenance values for every task, in block order.

    The reference is the first evaluation of the task after its most recent
    learning block; later evaluations before the task is learned again are
    compared against it.
    """
    summaries = summaries or block_summaries(log)
    out = []
    for task in log.tasks:
        awaiting = False
        ref = None
        for s in summaries:
            if s.block_type == LEARN and task in s.counts:
                awaiting, ref = True, None
            elif s.block_type == EVAL and task in s.eval_perf:
                if awaiting:
                    ref, awaiting = s, False
                elif ref is not None:
                    out.append(MaintenanceObservation(
                        task, s.block_num, ref.block_num, s.eval_perf[task] - ref.eval_perf[task]))
    return out


def performance_maintenance(log: LifetimeLog, summaries=None) -> MetricResult:
    obs = maintenance_observations(log, summaries)
    per_task: dict[TaskKey, list[float]] = {}
    for o in obs:
        per_task.setdefault(o.task, []).append(o.value)
    extras = {"per_task": [(str(t), float(np.mean(v))) for t, v in per_task.items()]}
    reason = "no evaluation blocks" if not log.eval_blocks() else (
        "no evaluation block follows a task's post-learning evaluation")
    return MetricResult.from_sub_values(
        "PM", [(f"{o.task}@{o.block_num}", o.value) for o in obs],
        extras=extras if obs else None, undefined_reason=reason)


# --- transfer ----------------------------------------------------------------

@dataclass(frozen=True)
class TransferOccurrence:
    source: TaskKey
    target: TaskKey
    before_block: int
    after_block: int
    value: float | None = None
    confounded: bool = False
    short: bool = False

    @property
    def label(self) -> str:
        return f"{self.source}->{self.target}"


def _eval_blocks_for(summaries, task):
    return [s for s in summaries if s.block_type == EVAL and task in s.eval_perf]


def _learned_between(summaries, lo: int, hi: int) -> list[TaskKey]:
    tasks: dict[TaskKey, None] = {}
    for s in summaries[lo + 1:hi]:
        if s.block_type == LEARN:
            for t in s.counts:
                tasks.setdefault(t, None)
    return list(tasks)


def _short_flags(summaries):
    """Per task, mean LX count over the learning blocks containing it."""
    totals: dict[TaskKey, list[int]] = {}
    for s in summaries:
        if s.block_type == LEARN:
            for t, n in s.counts.items():
                totals.setdefault(t, []).append(n)
    return {t: float(np.mean(v)) for t, v in totals.items()}


def _is_short(summaries, mean_len, source, lo, hi) -> bool:
    n = sum(s.counts.get(source, 0) for s in summaries[lo + 1:hi] if s.block_type == LEARN)
    return n < 0.1 * mean_len[source]


def forward_transfer_occurrences(log: LifetimeLog, summaries=None,
                                 excluded: list | None = None) -> list[TransferOccurrence]:
    """First forward-transfer occurrence of every eligible (source, target) pair.

    Pairs seen only once the target has begun learning are appended to
    ``excluded`` as ``(source, target, after_block)`` when a list is given.
    """
    summaries = summaries or block_summaries(log)
    mean_len = _short_flags(summaries)
    first_learned = {}
    for s in summaries:
        if s.block_type == LEARN:
            for t in s.counts:
                first_learned.setdefault(t, s.index)
    seen = set()
    out = []
    for target in log.tasks:
        evals = _eval_blocks_for(summaries, target)
        for before, after in zip(evals, evals[1:]):
            sources = _learned_between(summaries, before.index, after.index)
            if first_learned.get(target, len(summaries)) < after.index:
                if excluded is not None:
                    for source in sources:
                        if source != target and (source, target) not in seen:
                            seen.add((source, target))
                            excluded.append((source, target, after.block_num))
                continue
            for source in sources:
                if (source, target) in seen:
                    continue
                seen.add((source, target))
                out.append(TransferOccurrence(
                    source, target, before.block_num, after.block_num,
                    contrast(after.eval_perf[target], before.eval_perf[target]),
                    confounded=len(sources) > 1,
                    short=_is_short(summaries, mean_len, source, before.index, after.index)))
    return out


def backward_transfer_occurrences(log: LifetimeLog, summaries=None) -> list[TransferOccurrence]:
    """Every backward-transfer occurrence, in block order per affected task."""
    summaries = summaries or block_summaries(log)
    mean_len = _short_flags(summaries)
    out = []
    for target in log.tasks:
        evals = _eval_blocks_for(summaries, target)
        for before, after in zip(evals, evals[1:]):
            learned_prior = any(
                s.block_type == LEARN and target in s.counts for s in summaries[:before.index])
            if not learned_prior:
                continue
            between = _learned_between(summaries, before.index, after.index)
            if not between or target in between:
                continue
            value = contrast(after.eval_perf[target], before.eval_perf[target])
            for source in between:
                out.append(TransferOccurrence(
                    source, target, before.block_num, after.block_num, value,
                    confounded=len(between) > 1,
                    short=_is_short(summaries, mean_len, source, before.index, after.index)))
    return out


def _transfer_notes(occurrences, kind: str) -> list[str]:
    notes = []
    for o in occurrences:
        if o.confounded:
            notes.append(f"{kind} {o.label} (blocks {o.before_block}->{o.after_block}) confounded: "
                         "several tasks learned between the evaluations")
        if o.short:
            notes.append(f"{kind} {o.label} (blocks {o.before_block}->{o.after_block}): "
                         f"intervening learning of {o.source} shorter than 10% of its mean block length")
    return notes


def _ratio_series(log, summaries, occurrences):
    by_num = {s.block_num: s for s in summaries}
    out = []
    for o in occurrences:
        r = ratio(by_num[o.after_block].eval_perf[o.target], by_num[o.before_block].eval_perf[o.target])
        if r is not None:
            out.append((f"{o.label}@{o.after_block}", r))
    return out


def forward_transfer(log: LifetimeLog, summaries=None) -> MetricResult:
    summaries = summaries or block_summaries(log)
    excluded: list = []
    occ = forward_transfer_occurrences(log, summaries, excluded)
    reason = "no evaluation blocks" if not log.eval_blocks() else (
        "no task evaluated before and after another task's learning while still unlearned")
    extras = {"ratio": _ratio_series(log, summaries, occ)} if occ else None
    notes = _transfer_notes(occ, "FT") + [
        f"FT {src}->{tgt} excluded: {tgt} was learned before the evaluation in block {num}"
        for src, tgt, num in excluded]
    return MetricResult.from_sub_values(
        "FT", [(o.label, o.value) for o in occ], notes=notes,
        extras=extras, undefined_reason=reason)


def backward_transfer(log: LifetimeLog, summaries=None) -> MetricResult:
    """Lifetime BT from each pair's first value; all values kept in ``extras``."""
    summaries = summaries or block_summaries(log)
    occ = backward_transfer_occurrences(log, summaries)
    first: dict[tuple[TaskKey, TaskKey], TransferOccurrence] = {}
    for o in occ:
        first.setdefault((o.source, o.target), o)
    per_task: dict[TaskKey, dict[int, float]] = {}
    for o in occ:
        per_task.setdefault(o.target, {})[o.after_block] = o.value
    extras = {}
    if occ:
        extras = {
            "series": [(f"{o.label}@{o.after_block}", o.value) for o in occ],
            "per_task": [(str(t), float(np.mean(list(v.values())))) for t, v in per_task.items()],
            "ratio": _ratio_series(log, summaries, occ),
        }
    reason = "no evaluation blocks" if not log.eval_blocks() else (
        "no learned task evaluated on both sides of another task's learning")
    return MetricResult.from_sub_values(
        "BT", [(o.label, o.value) for o in first.values()],
        notes=_transfer_notes(first.values(), "BT"), extras=extras, undefined_reason=reason)
