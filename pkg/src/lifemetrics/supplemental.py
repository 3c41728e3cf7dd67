"""Performance Recovery, Cumulative Gain and Learn Burn."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lifetime import LEARN, LifetimeLog, TaskKey, task_series
from .metrics import MetricResult, terminal_learning_performance

CG_EPSILON = 1e-3
ZERO_RATE = 1e-12

PR_CAVEAT = "PR is highly variable across lifetimes; interpret alongside the recovery-time series"


@dataclass(frozen=True)
class RecoveryObservation:
    task: TaskKey
    lb_index: int
    block_num: int
    recovery_time: int


def recovery_time(values, prior_tlp: float) -> int:
    """LXs needed to climb back to ``prior_tlp``.

    0 when the block already starts at or above it, ``len(values) + 1`` when it
    never gets there.
    """
    x = np.asarray(values, dtype=float)
    hits = np.flatnonzero(x >= prior_tlp)
    if hits.size == 0:
        return int(x.size) + 1
    first = int(hits[0])
    return 0 if first == 0 else first + 1


def theil_sen_slope(x, y=None) -> float:
    """Median of all pairwise slopes; pairs sharing an x are skipped.

    Accepts either a sequence of ``(x, y)`` points or separate x and y arrays.
    """
    if y is None:
        pts = np.asarray(x, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    if np.unique(x).size < 2:
        raise ValueError("Theil-Sen slope needs at least two distinct x values")
    i, j = np.triu_indices(x.size, k=1)
    dx = x[j] - x[i]
    keep = dx != 0
    return float(np.median((y[j] - y[i])[keep] / dx[keep]))


def ols_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    denom = np.dot(xc, xc)
    if denom == 0:
        raise ValueError("slope undefined for fewer than two distinct x values")
    return float(np.dot(xc, y - y.mean()) / denom)


def recovery_observations(log: LifetimeLog) -> dict[TaskKey, list[RecoveryObservation]]:
    out = {}
    for task in log.tasks:
        series = task_series(log, task, LEARN)
        obs = []
        for k in range(1, len(series)):
            prior = terminal_learning_performance(series[k - 1][1])
            block_num, values = series[k]
            obs.append(RecoveryObservation(task, k + 1, block_num, recovery_time(values, prior)))
        if obs:
            out[task] = obs
    return out


def recovery_eligible_tasks(log: LifetimeLog) -> list[TaskKey]:
    return [t for t in log.tasks if len(task_series(log, t, LEARN)) >= 3]


def performance_recovery(log: LifetimeLog) -> MetricResult:
    """Negated Theil-Sen slope of recovery time against per-task block ordinal."""
    if not log.learn_blocks():
        return MetricResult.undefined("PR", "no learning blocks")
    obs = recovery_observations(log)
    sub, notes, times = [], [PR_CAVEAT], []
    for task, rows in obs.items():
        times += [(f"{task}#{o.lb_index}", float(o.recovery_time)) for o in rows]
        if len(rows) < 2:
            notes.append(f"task {task}: one recovery observation; PR needs two")
            continue
        slope = theil_sen_slope([o.lb_index for o in rows], [o.recovery_time for o in rows])
        sub.append((str(task), -slope))
    return MetricResult.from_sub_values(
        "PR", sub, notes, {"recovery_times": times} if times else None,
        undefined_reason="no task has three or more learning blocks")


def cumulative_gain(log: LifetimeLog, epsilon: float = CG_EPSILON) -> MetricResult:
    """Mean of per-block gains: sign of each learning block's trend slope."""
    blocks = log.learn_blocks()
    if not blocks:
        return MetricResult.undefined("CG", "no learning blocks")
    sub, notes, slopes = [], [], []
    for b in blocks:
        y = [r.metrics[log.perf_key] for r in log.block_records(b)]
        if len(y) < 2:
            notes.append(f"block {b.block_num}: single LX, gain taken as 0")
            slope = 0.0
        else:
            slope = ols_slope(np.arange(len(y)), y)
        gain = 1.0 if slope > epsilon else (-1.0 if slope < -epsilon else 0.0)
        sub.append((f"block {b.block_num}", gain))
        slopes.append((f"block {b.block_num}", slope))
    return MetricResult.from_sub_values("CG", sub, notes, {"slopes": slopes})


def learn_burn(log: LifetimeLog) -> MetricResult:
    """Mean within-block slope after each block change over the lifetime slope.

    The first learning block has no preceding change and contributes no burn
    rate.
    """
    blocks = log.learn_blocks()
    if len(blocks) < 2:
        return MetricResult.undefined("LB", "needs at least two learning blocks")
    key = log.perf_key
    y_all = np.array([r.metrics[key] for b in blocks for r in log.block_records(b)])
    rate = ols_slope(np.arange(y_all.size), y_all)
    notes = ["first learning block excluded: no change precedes it"]
    if abs(rate) <= ZERO_RATE:
        return MetricResult.undefined("LB", "average learn rate is zero", notes)
    sub, burns = [], []
    for b in blocks[1:]:
        y = [r.metrics[key] for r in log.block_records(b)]
        if len(y) < 2:
            notes.append(f"block {b.block_num}: single LX, no burn rate")
            continue
        br = ols_slope(np.arange(len(y)), y)
        burns.append((f"block {b.block_num}", br))
        sub.append((f"block {b.block_num}", br / rate))
    extras = {"burn_rates": burns, "average_learn_rate": [("lifetime", rate)]}
    return MetricResult.from_sub_values("LB", sub, notes, extras,
                                        undefined_reason="no learning block after a change has two LXs")
