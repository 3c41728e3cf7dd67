"""Single-task-expert curves, Relative Performance and Sample Efficiency."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .lifetime import LifetimeLog, LogFormatError, TaskKey, learning_curve, read_log
from .metrics import MetricResult
from .preprocess import smoothing_window

LOG_SUFFIXES = (".jsonl", ".json", ".ndjson", ".csv")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class SteCurve:
    task: TaskKey
    values: np.ndarray
    source_id: str = ""
    block_lengths: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("STE curve must be a non-empty 1-D series")
        if not np.all(np.isfinite(v)):
            raise ValueError("STE curve contains non-finite values")
        object.__setattr__(self, "values", v)
        if self.block_lengths and sum(self.block_lengths) != v.size:
            raise ValueError("block lengths do not cover the STE curve")

    @classmethod
    def from_log(cls, log: LifetimeLog, source_id: str | None = None) -> "SteCurve":
        tasks = {r.task for r in log.records}
        if len(tasks) > 1:
            names = ", ".join(sorted(str(t) for t in tasks))
            raise LogFormatError(f"STE must be single-task (found {names})")
        blocks = log.learn_blocks()
        if not blocks:
            raise LogFormatError("STE log has no learning experiences")
        values = np.concatenate([[r.metrics[log.perf_key] for r in log.block_records(b)] for b in blocks])
        return cls(next(iter(tasks)), values, source_id or log.lifetime_id,
                   tuple(b.length for b in blocks))


@dataclass(frozen=True)
class SteStore:
    curves: dict[TaskKey, list[SteCurve]] = field(default_factory=dict)

    @classmethod
    def from_curves(cls, curves) -> "SteStore":
        out: dict[TaskKey, list[SteCurve]] = {}
        for c in curves:
            out.setdefault(c.task, []).append(c)
        return cls(out)

    def get(self, task: TaskKey) -> list[SteCurve]:
        return self.curves.get(task, [])

    def __contains__(self, task) -> bool:
        return bool(self.curves.get(task))

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def tasks(self) -> list[TaskKey]:
        return list(self.curves)

    def map(self, fn: Callable[[SteCurve, int], SteCurve]) -> "SteStore":
        return SteStore({t: [fn(c, i) for i, c in enumerate(cs)] for t, cs in self.curves.items()})


def load_ste(directory: str | Path, perf_key: str, manifest: dict | None = None) -> SteStore:
    """Load one STE curve per log file in ``directory``.

    A ``manifest.json`` in the directory (or the ``manifest`` argument) maps
    STE task names to the names used in lifelong-learner logs.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"STE directory not found: {directory}")
    if manifest is None and (directory / MANIFEST_NAME).exists():
        manifest = json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))
    manifest = manifest or {}
    curves = []
    for path in sorted(directory.iterdir()):
        if path.name == MANIFEST_NAME or path.suffix.lower() not in LOG_SUFFIXES:
            continue
        try:
            curve = SteCurve.from_log(read_log(path, perf_key), path.stem)
        except LogFormatError as exc:
            raise LogFormatError(f"{path.name}: {exc}") from None
        name = manifest.get(curve.task.task_name)
        if name:
            curve = replace(curve, task=TaskKey(name, curve.task.variant_label))
        curves.append(curve)
    return SteStore.from_curves(curves)


def _learned_tasks(log: LifetimeLog) -> list[TaskKey]:
    seen: dict[TaskKey, None] = {}
    for b in log.learn_blocks():
        for t in b.tasks:
            seen.setdefault(t, None)
    return list(seen)


def relative_performance(log: LifetimeLog, ste: SteStore | None) -> MetricResult:
    """Ratio of summed learning performance to an STE's over the common prefix."""
    if not log.learn_blocks():
        return MetricResult.undefined("RP", "no learning blocks")
    ste = ste or SteStore()
    sub, notes, per_ste = [], [], []
    for task in _learned_tasks(log):
        curves = ste.get(task)
        if not curves:
            notes.append(f"task {task}: no STE")
            continue
        l2 = learning_curve(log, task)
        values = []
        for c in curves:
            m = min(l2.size, c.values.size)
            rp = float(np.sum(l2[:m]) / np.sum(c.values[:m]))
            values.append(rp)
            per_ste.append((f"{task}/{c.source_id}", rp))
        sub.append((str(task), float(np.mean(values))))
    return MetricResult.from_sub_values(
        "RP", sub, notes, {"per_ste": per_ste} if per_ste else None,
        undefined_reason="no task has an STE curve")


def rolling_means(values, window: int) -> np.ndarray:
    """Trailing mean at each position over ``min(window, available)`` values."""
    x = np.asarray(values, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(0, idx - window)
    return (csum[idx] - csum[lo]) / (idx - lo)


def saturation(values, window: int, rtol: float = 1e-6) -> tuple[float, int]:
    """Saturation value and experiences to saturation (1-based).

    The saturation value is the maximum trailing rolling mean; ETS is the
    first position whose rolling mean comes within ``rtol`` (relative) of it,
    which absorbs summation rounding on curves that flatten out.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("saturation of an empty series")
    if window < 1:
        raise ValueError("window must be at least 1")
    rm = rolling_means(x, window)
    sat = float(rm.max())
    hit = np.flatnonzero(rm >= sat - rtol * abs(sat))
    return sat, int(hit[0]) + 1


def is_saturated(values, window: int, margin: float, rtol: float = 1e-6) -> bool:
    """True when the final rolling mean sits within ``margin`` of the saturation value."""
    rm = rolling_means(values, window)
    top = rm.max()
    return bool(rm[-1] >= top - margin - rtol * abs(top))


def sample_efficiency(log: LifetimeLog, ste: SteStore | None, span: float | None = None,
                      margin_fraction: float = 0.05) -> MetricResult:
    """Saturation-value ratio times experiences-to-saturation ratio, per task.

    ``span`` is the value range the saturation margin is a fraction of; when
    omitted each task uses the range of its own L2 and STE values.
    """
    if not log.learn_blocks():
        return MetricResult.undefined("SE", "no learning blocks")
    ste = ste or SteStore()
    sub, notes, per_ste = [], [], []
    for task in _learned_tasks(log):
        curves = ste.get(task)
        if not curves:
            notes.append(f"task {task}: no STE")
            continue
        l2 = learning_curve(log, task)
        if span is None:
            pooled = np.concatenate([l2, *[c.values for c in curves]])
            task_span = float(pooled.max() - pooled.min())
        else:
            task_span = span
        margin = margin_fraction * task_span
        w_l2 = smoothing_window(l2.size)
        if not is_saturated(l2, w_l2, margin):
            notes.append(f"task {task}: lifelong-learner curve not saturated; ineligible for SE")
            continue
        values = []
        for c in curves:
            w = smoothing_window(c.values.size)
            if not is_saturated(c.values, w, margin):
                notes.append(f"task {task}: STE {c.source_id} not saturated; skipped")
                continue
            sat_l2, ets_l2 = saturation(l2, w_l2)
            sat_ste, ets_ste = saturation(c.values, w)
            se = (sat_l2 / sat_ste) * (ets_ste / ets_l2)
            values.append(se)
            per_ste.append((f"{task}/{c.source_id}", se))
        if values:
            sub.append((str(task), float(np.mean(values))))
    return MetricResult.from_sub_values(
        "SE", sub, notes, {"per_ste": per_ste} if per_ste else None,
        undefined_reason="no task with a saturated curve and an STE")


__all__ = [
    "SteCurve", "SteStore", "load_ste", "relative_performance", "rolling_means", "saturation",
    "is_saturated", "sample_efficiency",
]
