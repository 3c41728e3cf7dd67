"""Lifetime reports, clone aggregation and rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics as core
from . import supplemental
from .lifetime import LEARN, LifetimeLog
from .metrics import METRIC_NAMES, METRIC_ORDER, MetricResult
from .preprocess import PreprocessConfig, identity, preprocess as run_preprocess
from .ste import SteStore, relative_performance, sample_efficiency

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "markdown", "plotdata")

# metric -> neutral value; above it the metric indicates lifelong learning,
# except LB where lower is better
NEUTRAL = {"PM": 0.0, "FT": 0.0, "BT": 0.0, "RP": 1.0, "SE": 1.0, "PR": 0.0, "CG": 0.0, "LB": 1.0}

INTERPRETATION = {
    "PM": ("no forgetting and no further gain", "performance improves over the lifetime",
           "forgetting"),
    "FT": ("no forward transfer", "positive forward transfer", "interference with new tasks"),
    "BT": ("no backward transfer or interference", "positive backward transfer",
           "interference with earlier tasks"),
    "RP": ("on par with the single-task expert", "outperforms the single-task expert",
           "underperforms the single-task expert"),
    "SE": ("as sample-efficient as the single-task expert", "more sample-efficient than the single-task expert",
           "less sample-efficient than the single-task expert"),
    "PR": ("recovery times unchanged", "recovers faster over the lifetime", "recovers slower over the lifetime"),
    "CG": ("gains and losses balance", "keeps learning as tasks change", "ability to learn deteriorating"),
    "LB": ("adapts at its average learning rate", "adapts slowly after changes", "adapts quickly after changes"),
}

CAVEAT_MARKERS = ("confounded", "shorter than 10%", "not saturated", "highly variable")


@dataclass
class LifetimeReport:
    lifetime_id: str
    perf_key: str
    scenario: dict
    metrics: dict[str, MetricResult]
    caveats: list[str]
    normalization: dict | None = None
    config: dict | None = None
    series: list[dict] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def value(self, code: str) -> float | None:
        return self.metrics[code].value

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "lifetime_id": self.lifetime_id,
            "perf_key": self.perf_key,
            "scenario": self.scenario,
            "normalization": self.normalization,
            "config": self.config,
            "metrics": {k: self.metrics[k].to_dict() for k in METRIC_ORDER if k in self.metrics},
            "caveats": list(self.caveats),
            "series": self.series,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LifetimeReport":
        if data.get("schema_version", 0) > SCHEMA_VERSION:
            raise ValueError(f"report schema_version {data['schema_version']} is newer than supported")
        return cls(
            lifetime_id=data["lifetime_id"],
            perf_key=data["perf_key"],
            scenario=data["scenario"],
            metrics={k: MetricResult.from_dict(v) for k, v in data["metrics"].items()},
            caveats=list(data["caveats"]),
            normalization=data.get("normalization"),
            config=data.get("config"),
            series=list(data.get("series", [])),
            schema_version=data.get("schema_version", SCHEMA_VERSION),
        )


def load_report(path: str | Path) -> LifetimeReport:
    return LifetimeReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def scenario_summary(log: LifetimeLog) -> dict:
    blocks = []
    for b in log.blocks:
        counts: dict[str, int] = {}
        for r in log.block_records(b):
            counts[str(r.task)] = counts.get(str(r.task), 0) + 1
        blocks.append({"block_num": b.block_num, "block_type": b.block_type,
                       "tasks": [{"task": t, "count": n} for t, n in counts.items()]})
    n_lx = sum(1 for r in log.records if r.block_type == LEARN)
    return {
        "blocks": blocks,
        "tasks": [str(t) for t in log.tasks],
        "n_lx": n_lx,
        "n_ex": len(log.records) - n_lx,
        "n_learn_blocks": len(log.learn_blocks()),
        "n_eval_blocks": len(log.eval_blocks()),
    }


def compute_metrics(log: LifetimeLog, ste: SteStore | None = None, span: float | None = None) -> dict[str, MetricResult]:
    """All eight metrics on ``log`` as given (no preprocessing)."""
    summaries = core.block_summaries(log)
    steps = {
        "PM": lambda: core.performance_maintenance(log, summaries),
        "FT": lambda: core.forward_transfer(log, summaries),
        "BT": lambda: core.backward_transfer(log, summaries),
        "RP": lambda: relative_performance(log, ste),
        "SE": lambda: sample_efficiency(log, ste, span=span),
        "PR": lambda: supplemental.performance_recovery(log),
        "CG": lambda: supplemental.cumulative_gain(log),
        "LB": lambda: supplemental.learn_burn(log),
    }
    results = {}
    for code, step in steps.items():
        if code in ("RP", "SE") and ste is None:
            results[code] = MetricResult.undefined(code, "no STE curves supplied")
            continue
        try:
            results[code] = step()
        except core.UndefinedContrastError as exc:
            results[code] = MetricResult.undefined(code, str(exc))
    return results


def _caveats(scenario: dict, results: dict[str, MetricResult], normalized: bool) -> list[str]:
    parts = ", ".join(f"{b['block_type']}:{'+'.join(t['task'] for t in b['tasks'])}" for b in scenario["blocks"])
    out = [
        f"scenario: {scenario['n_learn_blocks']} learning blocks, {scenario['n_eval_blocks']} evaluation "
        f"blocks, {scenario['n_lx']} LXs, {scenario['n_ex']} EXs over tasks {', '.join(scenario['tasks'])}",
        f"block sequence: {parts}",
        "values depend on scenario structure and difficulty; compare only across like scenarios",
    ]
    if not normalized:
        out.append("metrics computed on raw, unnormalized values")
    for code in METRIC_ORDER:
        for note in results[code].notes:
            if any(m in note for m in CAVEAT_MARKERS):
                out.append(f"{code}: {note}")
    return out


def compute_report(log: LifetimeLog, ste: SteStore | None = None, config: PreprocessConfig | None = None,
                   normalize: bool = True) -> LifetimeReport:
    """Preprocess, compute every metric and assemble a report for one lifetime."""
    config = config or PreprocessConfig()
    prep = run_preprocess(log, ste, config) if normalize else identity(log, ste)
    span = config.scale_max - config.scale_min if normalize else None
    results = compute_metrics(prep.log, prep.ste, span)
    if normalize and ste is not None and results["RP"].defined:
        raw_rp = relative_performance(prep.raw, prep.raw_ste)
        results["RP"].extras["raw_per_task"] = list(raw_rp.sub_values)
    scenario = scenario_summary(log)
    series = [
        {"exp_num": r.exp_num, "block_num": r.block_num, "block_type": r.block_type, "task": str(r.task),
         "raw": raw.metrics[log.perf_key], "processed": r.metrics[log.perf_key]}
        for r, raw in zip(prep.log.records, prep.raw.records)
    ]
    return LifetimeReport(
        lifetime_id=log.lifetime_id,
        perf_key=log.perf_key,
        scenario=scenario,
        metrics=results,
        caveats=_caveats(scenario, results, normalize),
        normalization=prep.params.to_dict() if prep.params is not None else None,
        config=config.to_dict() if normalize else None,
        series=series,
    )


def interpretation(code: str, value: float | None) -> str:
    if value is None:
        return f"{code} undefined"
    neutral = NEUTRAL[code]
    same, above, below = INTERPRETATION[code]
    if value > neutral:
        return f"{code} > {neutral:g}: {above}"
    if value < neutral:
        return f"{code} < {neutral:g}: {below}"
    return f"{code} = {neutral:g}: {same}"


# --- aggregation -------------------------------------------------------------

@dataclass
class MetricStats:
    mean: float | None
    std: float | None
    count: int
    values: list[tuple[str, float]]

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "count": self.count,
                "values": [[k, v] for k, v in self.values]}


@dataclass
class AggregateReport:
    metrics: dict[str, MetricStats]
    lifetime_ids: list[str]
    perf_keys: list[str]
    warnings: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "lifetime_ids": list(self.lifetime_ids),
            "perf_keys": list(self.perf_keys),
            "metrics": {k: v.to_dict() for k, v in self.metrics.items()},
            "warnings": list(self.warnings),
        }


def aggregate(reports: list[LifetimeReport]) -> AggregateReport:
    """Mean, sample standard deviation and count per metric across lifetimes.

    Lifetimes where a metric is undefined are left out of that metric's
    statistics.  A single defined value has standard deviation 0.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    perf_keys = sorted({r.perf_key for r in reports})
    warnings = []
    if len(perf_keys) > 1:
        warnings.append(f"reports use different perf keys: {', '.join(perf_keys)}")
    stats = {}
    for code in METRIC_ORDER:
        vals = [(r.lifetime_id, r.metrics[code].value) for r in reports
                if code in r.metrics and r.metrics[code].value is not None]
        if vals:
            x = np.array([v for _, v in vals])
            mean = float(np.mean(x))
            std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
        else:
            mean = std = None
        stats[code] = MetricStats(mean, std, len(vals), vals)
    return AggregateReport(stats, [r.lifetime_id for r in reports], perf_keys, warnings)


# --- rendering ---------------------------------------------------------------

def _json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v: float | None) -> str:
    if v is None:
        return "undefined"
    return f"{v:.6g}"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render(report: LifetimeReport | AggregateReport, fmt: str = "json") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    if isinstance(report, AggregateReport):
        return _render_aggregate(report, fmt)
    if fmt == "json":
        return _json(report.to_dict())
    if fmt == "csv":
        rows = []
        for code in METRIC_ORDER:
            m = report.metrics[code]
            rows.append([code, "value", "lifetime", "" if m.value is None else repr(m.value), m.reason or ""])
            rows += [[code, "sub_value", k, repr(v), ""] for k, v in m.sub_values]
            for name, series in sorted(m.extras.items()):
                rows += [[code, name, k, repr(v), ""] for k, v in series]
        return _csv(rows, ["metric", "kind", "label", "value", "undefined_reason"])
    if fmt == "plotdata":
        rows = [[s["task"], s["exp_num"], repr(s["raw"]), repr(s["processed"]), s["block_num"], s["block_type"]]
                for s in report.series]
        return _csv(rows, ["task", "exp_num", "raw", "processed", "block_num", "block_type"])
    return _markdown(report)


def _markdown(report: LifetimeReport) -> str:
    lines = [f"# Lifelong-learning metrics: {report.lifetime_id or 'lifetime'}", "",
             f"Performance key: `{report.perf_key}`", "", "## Metrics", "",
             "| Metric | Value | Reading |", "|---|---|---|"]
    for code in METRIC_ORDER:
        m = report.metrics[code]
        reading = interpretation(code, m.value) if m.defined else f"undefined: {m.reason}"
        lines.append(f"| {METRIC_NAMES[code]} ({code}) | {_fmt(m.value)} | {reading} |")
    lines += ["", "## Sub-values", ""]
    for code in METRIC_ORDER:
        m = report.metrics[code]
        if m.sub_values:
            lines.append(f"- {code}: " + ", ".join(f"{k} = {_fmt(v)}" for k, v in m.sub_values))
    lines += ["", "## Context", ""]
    lines += [f"- {c}" for c in report.caveats]
    return "\n".join(lines) + "\n"


def _render_aggregate(agg: AggregateReport, fmt: str) -> str:
    if fmt == "json":
        return _json(agg.to_dict())
    if fmt == "csv":
        rows = [[k, "" if s.mean is None else repr(s.mean), "" if s.std is None else repr(s.std), s.count]
                for k, s in agg.metrics.items()]
        return _csv(rows, ["metric", "mean", "std", "count"])
    if fmt == "markdown":
        lines = [f"# Aggregate over {len(agg.lifetime_ids)} lifetimes", "",
                 "| Metric | Mean | Std | Count |", "|---|---|---|---|"]
        for k, s in agg.metrics.items():
            lines.append(f"| {METRIC_NAMES[k]} ({k}) | {_fmt(s.mean)} | {_fmt(s.std)} | {s.count} |")
        lines += ["", "Lifetimes: " + ", ".join(agg.lifetime_ids)]
        lines += [f"Warning: {w}" for w in agg.warnings]
        return "\n".join(lines) + "\n"
    raise ValueError("plotdata is only available for lifetime reports")


def all_undefined(report: LifetimeReport) -> bool:
    return all(not m.defined for m in report.metrics.values())

