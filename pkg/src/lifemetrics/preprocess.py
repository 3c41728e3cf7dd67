"""Smoothing, percentile clamping and range scaling of performance values.

The pipeline runs in a fixed order: each learning block is smoothed with a
flat window, clamp bounds are computed per task variant from the smoothed
lifelong-learner and single-task-expert data together, then every value is
clamped and mapped affinely onto ``[scale_min, scale_max]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .lifetime import LifetimeLog, TaskKey

if TYPE_CHECKING:
    from .ste import SteStore


@dataclass(frozen=True)
class PreprocessConfig:
    window_fraction: float = 0.2
    window_cap: int = 100
    clamp_low_pct: float = 10.0
    clamp_high_pct: float = 90.0
    scale_min: float = 1.0
    scale_max: float = 101.0

    def __post_init__(self):
        if not 0 < self.window_fraction <= 1:
            raise ValueError("window_fraction must lie in (0, 1]")
        if self.window_cap < 1:
            raise ValueError("window_cap must be at least 1")
        if not 0 <= self.clamp_low_pct < self.clamp_high_pct <= 100:
            raise ValueError("need 0 <= clamp_low_pct < clamp_high_pct <= 100")
        if not 0 < self.scale_min < self.scale_max:
            raise ValueError("need 0 < scale_min < scale_max")

    @classmethod
    def from_dict(cls, data: dict) -> "PreprocessConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    @classmethod
    def from_file(cls, path: str | Path) -> "PreprocessConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)


def smoothing_window(n: int, config: PreprocessConfig | None = None) -> int:
    """Flat-window length for a block of ``n`` experiences (never below 1)."""
    config = config or PreprocessConfig()
    return max(1, min(math.floor(config.window_fraction * n), config.window_cap))


def smooth_block(values, config: PreprocessConfig | None = None, window: int | None = None) -> np.ndarray:
    """Centered flat moving average with edge replication; output length equals input length."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("cannot smooth an empty block")
    L = window if window is not None else smoothing_window(n, config)
    if L <= 1:
        return x.copy()
    left = (L - 1) // 2
    right = L - 1 - left
    padded = np.concatenate([np.full(left, x[0]), x, np.full(right, x[-1])])
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    return (csum[L:] - csum[:-L]) / L


def compute_clamp_bounds(values, config: PreprocessConfig | None = None) -> tuple[float, float]:
    """Low/high clamp percentiles, linearly interpolated between order statistics."""
    config = config or PreprocessConfig()
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no values to compute clamp bounds from")
    lo, hi = np.percentile(x, [config.clamp_low_pct, config.clamp_high_pct], method="linear")
    return float(lo), float(hi)


@dataclass(frozen=True)
class NormalizationParams:
    bounds: dict[TaskKey, tuple[float, float]]
    scale_min: float = 1.0
    scale_max: float = 101.0

    def transform(self, task: TaskKey, values) -> np.ndarray:
        lo, hi = self.bounds[task]
        return clamp_and_scale(values, lo, hi, self.scale_min, self.scale_max)

    def to_dict(self) -> dict:
        return {
            "scale_min": self.scale_min,
            "scale_max": self.scale_max,
            "bounds": [
                {"task_name": t.task_name, "variant_label": t.variant_label, "p_low": lo, "p_high": hi}
                for t, (lo, hi) in sorted(self.bounds.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationParams":
        bounds = {
            TaskKey(b["task_name"], b["variant_label"]): (b["p_low"], b["p_high"])
            for b in data["bounds"]
        }
        return cls(bounds, data["scale_min"], data["scale_max"])


def clamp_and_scale(values, p_low: float, p_high: float, scale_min: float = 1.0,
                    scale_max: float = 101.0) -> np.ndarray:
    x = np.clip(np.asarray(values, dtype=float), p_low, p_high)
    if p_high == p_low:
        return np.full_like(x, scale_min)
    y = scale_min + (scale_max - scale_min) * ((x - p_low) / (p_high - p_low))
    # guard against rounding past the ends of the range
    return np.clip(y, scale_min, scale_max)


@dataclass(frozen=True)
class Preprocessed:
    """Processed log and STE curves alongside the raw inputs they came from."""

    log: LifetimeLog
    raw: LifetimeLog
    params: NormalizationParams | None
    ste: "SteStore | None" = None
    raw_ste: "SteStore | None" = None
    config: PreprocessConfig = field(default_factory=PreprocessConfig)


def smooth_log(log: LifetimeLog, config: PreprocessConfig | None = None) -> np.ndarray:
    """Per-record values with every learning block's per-task series smoothed."""
    values = log.values()
    out = values.copy()
    tasks = [r.task for r in log.records]
    for block in log.learn_blocks():
        for task in block.tasks:
            idx = np.array([i for i in range(block.start, block.stop) if tasks[i] == task])
            out[idx] = smooth_block(values[idx], config)
    return out


def smooth_curve(values, block_lengths=None, config: PreprocessConfig | None = None) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    lengths = list(block_lengths) if block_lengths else [x.size]
    if sum(lengths) != x.size:
        raise ValueError("block lengths do not cover the curve")
    parts, start = [], 0
    for n in lengths:
        parts.append(smooth_block(x[start:start + n], config))
        start += n
    return np.concatenate(parts)


def preprocess(log: LifetimeLog, ste: "SteStore | None" = None,
               config: PreprocessConfig | None = None) -> Preprocessed:
    """Smooth, clamp and scale a lifetime and its STE curves."""
    config = config or PreprocessConfig()
    smoothed = smooth_log(log, config)
    tasks = [r.task for r in log.records]

    smoothed_ste = {}
    if ste is not None:
        for task, curves in ste.curves.items():
            smoothed_ste[task] = [smooth_curve(c.values, c.block_lengths, config) for c in curves]

    pools: dict[TaskKey, list[np.ndarray]] = {}
    for task in log.tasks:
        pools[task] = [smoothed[[i for i, t in enumerate(tasks) if t == task]]]
    for task, arrays in smoothed_ste.items():
        pools.setdefault(task, []).extend(arrays)
    bounds = {t: compute_clamp_bounds(np.concatenate(v), config) for t, v in pools.items()}
    params = NormalizationParams(bounds, config.scale_min, config.scale_max)

    processed = np.empty_like(smoothed)
    for task in log.tasks:
        idx = np.array([i for i, t in enumerate(tasks) if t == task])
        processed[idx] = params.transform(task, smoothed[idx])

    ste_out = None
    if ste is not None:
        ste_out = ste.map(lambda curve, i: replace(
            curve, values=params.transform(curve.task, smoothed_ste[curve.task][i])))
    return Preprocessed(log.with_values(processed), log, params, ste_out, ste, config)


def identity(log: LifetimeLog, ste: "SteStore | None" = None) -> Preprocessed:
    """Raw values passed through untouched, for analysis on unnormalized data."""
    return Preprocessed(log, log, None, ste, ste)


__all__ = [
    "PreprocessConfig", "NormalizationParams", "Preprocessed", "smoothing_window", "smooth_block",
    "smooth_curve", "smooth_log", "compute_clamp_bounds", "clamp_and_scale", "preprocess", "identity",
]
