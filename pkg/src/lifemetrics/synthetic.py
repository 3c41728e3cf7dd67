"""Synthetic lifetimes from an idealized exponential-saturation learner.

Each task has a performance level ``p`` that moves toward its asymptote by a
factor ``exp(-learn_rate)`` of the remaining gap per learning experience:

    p <- asymptote - (asymptote - p) * exp(-learn_rate)

so after ``t`` experiences from ``p0`` the level is
``asymptote - (asymptote - p0) * exp(-learn_rate * t)``.  While task A learns,
every other task B receives ``coef(A -> B) * (asymptote_B - start_B)`` times
A's gain in mastery fraction, then decays toward its start by a factor
``1 - forgetting_B``.  Each experience records the level *before* its update;
evaluation experiences record the level and leave it unchanged.

Noise is additive Gaussian drawn from numpy's PCG64 generator
(``numpy.random.default_rng(seed)``), clipped to five standard deviations.

:func:`expected_values` recomputes every metric from closed-form block
endpoints without touching the metric modules, which makes it an oracle for
noise-free fixtures analysed on raw values.
"""

from __future__ import annotations

import json
import math
import statistics
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lifetime import EVAL, LEARN, BLOCK_TYPES, ExperienceRecord, LifetimeLog, TaskKey
from .ste import SteCurve

PERF_KEY = "performance"
NOISE_CLIP = 5.0


@dataclass(frozen=True)
class TaskProfile:
    asymptote: float
    learn_rate: float
    start: float
    forgetting: float = 0.0

    def __post_init__(self):
        if self.learn_rate <= 0:
            raise ValueError("learn_rate must be positive")
        if not 0 <= self.forgetting <= 1:
            raise ValueError("forgetting must lie in [0, 1]")
        if self.asymptote < self.start:
            raise ValueError("asymptote must not lie below start")


@dataclass(frozen=True)
class LearnerProfile:
    tasks: dict[TaskKey, TaskProfile]
    transfer: dict[tuple[TaskKey, TaskKey], float] = field(default_factory=dict)
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        for (src, dst), coef in self.transfer.items():
            if not -1 <= coef <= 1:
                raise ValueError(f"transfer {src}->{dst} must lie in [-1, 1]")
            if src not in self.tasks or dst not in self.tasks:
                raise ValueError(f"transfer {src}->{dst} names an unknown task")

    @classmethod
    def from_dict(cls, data: dict) -> "LearnerProfile":
        tasks = {}
        for entry in data["tasks"]:
            key = TaskKey.from_params(entry["task"], entry.get("params"))
            tasks[key] = TaskProfile(
                float(entry["asymptote"]), float(entry["learn_rate"]), float(entry["start"]),
                float(entry.get("forgetting", 0.0)))
        transfer = {}
        for entry in data.get("transfer", []):
            src = TaskKey.from_params(entry["source"], entry.get("source_params"))
            dst = TaskKey.from_params(entry["target"], entry.get("target_params"))
            transfer[(src, dst)] = float(entry["coef"])
        return cls(tasks, transfer, float(data.get("noise_std", 0.0)), int(data.get("seed", 0)))

    def to_dict(self) -> dict:
        tasks = []
        for key, tp in self.tasks.items():
            entry = {"task": key.task_name, "asymptote": tp.asymptote, "learn_rate": tp.learn_rate,
                     "start": tp.start, "forgetting": tp.forgetting}
            if key.variant_label:
                entry["params"] = key.params
            tasks.append(entry)
        transfer = []
        for (src, dst), coef in self.transfer.items():
            entry = {"source": src.task_name, "target": dst.task_name, "coef": coef}
            if src.variant_label:
                entry["source_params"] = src.params
            if dst.variant_label:
                entry["target_params"] = dst.params
            transfer.append(entry)
        return {"tasks": tasks, "transfer": transfer, "noise_std": self.noise_std, "seed": self.seed}

    def with_seed(self, seed: int) -> "LearnerProfile":
        return LearnerProfile(self.tasks, self.transfer, self.noise_std, seed)


@dataclass(frozen=True)
class BlockSpec:
    block_type: str
    items: tuple[tuple[TaskKey, int], ...]

    def __post_init__(self):
        if self.block_type not in BLOCK_TYPES:
            raise ValueError(f"unknown block_type {self.block_type!r}")
        if not self.items:
            raise ValueError("block spec needs at least one task")
        for task, count in self.items:
            if count < 1:
                raise ValueError(f"count for {task} must be at least 1")


@dataclass(frozen=True)
class ScenarioSpec:
    blocks: tuple[BlockSpec, ...]

    @classmethod
    def build(cls, *blocks) -> "ScenarioSpec":
        """``build(("eval", [("A", 10)]), ("learn", [("A", 200)]), ...)``."""
        out = []
        for block_type, items in blocks:
            keys = tuple((t if isinstance(t, TaskKey) else TaskKey(t), int(n)) for t, n in items)
            out.append(BlockSpec(block_type, keys))
        return cls(tuple(out))

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        blocks = []
        for b in data["blocks"]:
            items = []
            for it in b["tasks"]:
                if isinstance(it, dict):
                    items.append((TaskKey.from_params(it["task"], it.get("params")), int(it["count"])))
                else:
                    name, count = it
                    items.append((TaskKey(name), int(count)))
            blocks.append(BlockSpec(b["type"], tuple(items)))
        return cls(tuple(blocks))

    def to_dict(self) -> dict:
        blocks = []
        for b in self.blocks:
            items = []
            for t, n in b.items:
                entry = {"task": t.task_name, "count": n}
                if t.variant_label:
                    entry["params"] = t.params
                items.append(entry)
            blocks.append({"type": b.block_type, "tasks": items})
        return {"blocks": blocks}

    @property
    def tasks(self) -> list[TaskKey]:
        return list(dict.fromkeys(t for b in self.blocks for t, _ in b.items))

    def learn_counts(self) -> dict[TaskKey, int]:
        out: dict[TaskKey, int] = {}
        for b in self.blocks:
            if b.block_type == LEARN:
                for t, n in b.items:
                    out[t] = out.get(t, 0) + n
        return out


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _check(spec: ScenarioSpec, profile: LearnerProfile):
    missing = [str(t) for t in spec.tasks if t not in profile.tasks]
    if missing:
        raise ValueError(f"profile has no entry for tasks: {', '.join(missing)}")


def _noise(rng, profile: LearnerProfile, n: int) -> np.ndarray:
    if profile.noise_std == 0:
        return np.zeros(n)
    s = profile.noise_std
    return np.clip(rng.normal(0.0, s, n), -NOISE_CLIP * s, NOISE_CLIP * s)


def generate_lifetime(spec: ScenarioSpec, profile: LearnerProfile, lifetime_id: str = "synthetic",
                      perf_key: str = PERF_KEY) -> LifetimeLog:
    """Step the learner through ``spec`` one experience at a time."""
    _check(spec, profile)
    rng = np.random.default_rng(profile.seed)
    level = {t: tp.start for t, tp in profile.tasks.items()}
    records = []
    exp = 0
    for block_num, block in enumerate(spec.blocks):
        for task, count in block.items:
            noise = _noise(rng, profile, count)
            tp = profile.tasks[task]
            q = math.exp(-tp.learn_rate)
            span = tp.asymptote - tp.start
            for i in range(count):
                records.append(ExperienceRecord(
                    exp, block_num, block.block_type, task,
                    {perf_key: float(level[task] + noise[i])}, lifetime_id))
                exp += 1
                if block.block_type == EVAL:
                    continue
                before = level[task]
                level[task] = tp.asymptote - (tp.asymptote - before) * q
                gain = (level[task] - before) / span if span > 0 else 0.0
                for other, op in profile.tasks.items():
                    if other == task:
                        continue
                    coef = profile.transfer.get((task, other), 0.0)
                    if coef != 0.0:
                        level[other] += coef * (op.asymptote - op.start) * gain
                    if op.forgetting > 0.0:
                        level[other] = op.start + (level[other] - op.start) * (1.0 - op.forgetting)
    return LifetimeLog.from_records(records, perf_key, lifetime_id)


def _task_seed(seed: int, task: TaskKey) -> list[int]:
    return [seed, zlib.crc32(str(task).encode("utf-8"))]


def generate_ste(task: TaskKey, profile: LearnerProfile, n_lx: int, source_id: str | None = None) -> SteCurve:
    """Curve of an expert that only ever learns ``task``: same growth law, no transfer or forgetting."""
    if task not in profile.tasks:
        raise ValueError(f"profile has no entry for task {task}")
    if n_lx < 1:
        raise ValueError("n_lx must be at least 1")
    tp = profile.tasks[task]
    q = math.exp(-tp.learn_rate)
    values = np.empty(n_lx)
    level = tp.start
    for i in range(n_lx):
        values[i] = level
        level = tp.asymptote - (tp.asymptote - level) * q
    rng = np.random.default_rng(_task_seed(profile.seed, task))
    values = values + _noise(rng, profile, n_lx)
    return SteCurve(task, values, source_id or f"ste-{task.task_name}", (n_lx,))


def ste_log(curve: SteCurve, perf_key: str = PERF_KEY) -> LifetimeLog:
    records = []
    exp = 0
    lengths = curve.block_lengths or (curve.values.size,)
    for block_num, n in enumerate(lengths):
        for _ in range(n):
            records.append(ExperienceRecord(exp, block_num, LEARN, curve.task,
                                            {perf_key: float(curve.values[exp])}, curve.source_id))
            exp += 1
    return LifetimeLog.from_records(records, perf_key, curve.source_id)


# --- closed-form oracle --------------------------------------------------------

def _decay_sum(q: float, f: float, n: int) -> float:
    """sum_{t=1..n} q**(t-1) * rho**(n-t+1) with rho = 1 - f."""
    if f >= 1.0:
        return 0.0
    rho = 1.0 - f
    u = math.log(q) - math.log1p(-f)  # log(q / rho)
    if u == 0.0:
        return n * rho ** n
    if u < 0:
        return rho ** n * math.expm1(n * u) / math.expm1(u)
    return rho * q ** (n - 1) * math.expm1(-n * u) / math.expm1(-u)


def _curve(tp: TaskProfile, p0: float, n: int) -> list[float]:
    d = tp.asymptote - p0
    return [tp.asymptote - d * math.exp(-tp.learn_rate * t) for t in range(n)]


def _window(n: int) -> int:
    return max(1, min(math.floor(0.2 * n), 100))


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs)


def _slope(y) -> float:
    n = len(y)
    xbar = (n - 1) / 2
    ybar = _mean(y)
    num = math.fsum((i - xbar) * (v - ybar) for i, v in enumerate(y))
    den = math.fsum((i - xbar) ** 2 for i in range(n))
    return num / den


def _rolling(y, w) -> list[float]:
    return [_mean(y[max(0, i + 1 - w):i + 1]) for i in range(len(y))]


def _contrast(a, b):
    return (a - b) / (a + b)


def closed_form_values(spec: ScenarioSpec, profile: LearnerProfile):
    """Block-by-block closed-form walk: per block, per task, the recorded values."""
    _check(spec, profile)
    level = {t: tp.start for t, tp in profile.tasks.items()}
    blocks = []
    for block in spec.blocks:
        per_task: dict[TaskKey, list[float]] = {}
        order: list[float] = []
        for task, n in block.items:
            tp = profile.tasks[task]
            if block.block_type == EVAL:
                vals = [level[task]] * n
            else:
                p0 = level[task]
                vals = _curve(tp, p0, n)
                d = tp.asymptote - p0
                level[task] = tp.asymptote - d * math.exp(-tp.learn_rate * n)
                q = math.exp(-tp.learn_rate)
                span = tp.asymptote - tp.start
                for other, op in profile.tasks.items():
                    if other == task:
                        continue
                    coef = profile.transfer.get((task, other), 0.0)
                    if coef == 0.0 and op.forgetting == 0.0:
                        continue
                    x0 = level[other] - op.start
                    c = coef * (op.asymptote - op.start) * d * (1 - q) / span if span > 0 else 0.0
                    if op.forgetting == 0.0:
                        gain = c * -math.expm1(-tp.learn_rate * n) / -math.expm1(-tp.learn_rate)
                        level[other] = level[other] + gain
                    else:
                        x = (1 - op.forgetting) ** n * x0 + c * _decay_sum(q, op.forgetting, n)
                        level[other] = op.start + x
            per_task.setdefault(task, []).extend(vals)
            order.extend(vals)
        blocks.append((block.block_type, per_task, order))
    return blocks


def expected_values(spec: ScenarioSpec, profile: LearnerProfile,
                    ste_lengths: dict[TaskKey, int] | None = None) -> dict[str, float | None]:
    """Every metric recomputed from the closed-form curves (raw, unpreprocessed values).

    ``ste_lengths`` gives each task's STE curve length; tasks without an entry
    get no STE, so RP and SE skip them.
    """
    if profile.noise_std != 0:
        raise ValueError("oracle requires zero noise")
    blocks = closed_form_values(spec, profile)
    tasks = spec.tasks
    ste_lengths = ste_lengths or {}
    out: dict[str, float | None] = {}

    def evals(task):
        return [(i, _mean(pt[task])) for i, (bt, pt, _) in enumerate(blocks) if bt == EVAL and task in pt]

    def learned_in(i, task):
        return blocks[i][0] == LEARN and task in blocks[i][1]

    # maintenance
    mvs = []
    for task in tasks:
        ref, awaiting = None, False
        for i, (bt, pt, _) in enumerate(blocks):
            if bt == LEARN and task in pt:
                ref, awaiting = None, True
            elif bt == EVAL and task in pt:
                ep = _mean(pt[task])
                if awaiting:
                    ref, awaiting = ep, False
                elif ref is not None:
                    mvs.append(ep - ref)
    out["PM"] = _mean(mvs) if mvs else None

    # forward transfer: first occurrence per pair, target still unlearned
    fts = {}
    for target in tasks:
        ev = evals(target)
        for (i0, g0), (i1, g1) in zip(ev, ev[1:]):
            if any(learned_in(k, target) for k in range(i1)):
                break
            for k in range(i0 + 1, i1):
                if blocks[k][0] == LEARN:
                    for src in blocks[k][1]:
                        fts.setdefault((src, target), _contrast(g1, g0))
    out["FT"] = _mean(list(fts.values())) if fts else None

    # backward transfer: first occurrence per pair
    bts = {}
    for target in tasks:
        ev = evals(target)
        for (i0, b0), (i1, b1) in zip(ev, ev[1:]):
            if not any(learned_in(k, target) for k in range(i0)):
                continue
            between = [s for k in range(i0 + 1, i1) if blocks[k][0] == LEARN for s in blocks[k][1]]
            if not between or target in between:
                continue
            for src in between:
                bts.setdefault((src, target), _contrast(b1, b0))
    out["BT"] = _mean(list(bts.values())) if bts else None

    learned = [t for t in tasks if any(bt == LEARN and t in pt for bt, pt, _ in blocks)]
    curves = {t: [v for bt, pt, _ in blocks if bt == LEARN for v in pt.get(t, [])] for t in learned}
    stes = {t: _curve(profile.tasks[t], profile.tasks[t].start, n) for t, n in ste_lengths.items()}

    rps = []
    for t in learned:
        if t in stes:
            m = min(len(curves[t]), len(stes[t]))
            rps.append(math.fsum(curves[t][:m]) / math.fsum(stes[t][:m]))
    out["RP"] = _mean(rps) if rps else None

    ses = []
    for t in learned:
        if t not in stes:
            continue
        l2, st = curves[t], stes[t]
        span = max(l2 + st) - min(l2 + st)
        margin = 0.05 * span
        rm_l2, rm_st = _rolling(l2, _window(len(l2))), _rolling(st, _window(len(st)))
        sat_l2, sat_st = max(rm_l2), max(rm_st)
        if rm_l2[-1] < sat_l2 - margin - 1e-6 * abs(sat_l2):
            continue
        if rm_st[-1] < sat_st - margin - 1e-6 * abs(sat_st):
            continue
        ets_l2 = next(i for i, v in enumerate(rm_l2) if v >= sat_l2 - 1e-6 * abs(sat_l2)) + 1
        ets_st = next(i for i, v in enumerate(rm_st) if v >= sat_st - 1e-6 * abs(sat_st)) + 1
        ses.append((sat_l2 / sat_st) * (ets_st / ets_l2))
    out["SE"] = _mean(ses) if ses else None

    # recovery: per task block ordinal vs recovery time, negated Theil-Sen slope
    prs = []
    for t in tasks:
        series = [pt[t] for bt, pt, _ in blocks if bt == LEARN and t in pt]
        pts = []
        for k in range(1, len(series)):
            prev = series[k - 1]
            tlp = _mean(prev[-max(1, -(-len(prev) // 10)):])
            vals = series[k]
            hit = next((i for i, v in enumerate(vals) if v >= tlp), None)
            rt = len(vals) + 1 if hit is None else (0 if hit == 0 else hit + 1)
            pts.append((k + 1, rt))
        if len(pts) >= 2:
            slopes = [(yj - yi) / (xj - xi) for a, (xi, yi) in enumerate(pts) for (xj, yj) in pts[a + 1:]]
            prs.append(-statistics.median(slopes))
    out["PR"] = _mean(prs) if prs else None

    learn_orders = [order for bt, _, order in blocks if bt == LEARN]
    gains = []
    for y in learn_orders:
        s = _slope(y) if len(y) >= 2 else 0.0
        gains.append(1.0 if s > 1e-3 else (-1.0 if s < -1e-3 else 0.0))
    out["CG"] = _mean(gains) if gains else None

    out["LB"] = None
    if len(learn_orders) >= 2:
        rate = _slope([v for y in learn_orders for v in y])
        burns = [_slope(y) for y in learn_orders[1:] if len(y) >= 2]
        if abs(rate) > 1e-12 and burns:
            out["LB"] = _mean([b / rate for b in burns])
    return out
