"""Command-line entry point: ``lifemetrics validate|compute|aggregate|synth``.

Every flag can also be set in a JSON config file (``--config`` or the
``LIFEMETRICS_CONFIG`` environment variable); flags win over the file.
Exit codes: 0 success, 1 input error, 2 every metric undefined.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .lifetime import LogFormatError, read_log, validate, write_log
from .preprocess import PreprocessConfig
from .report import FORMATS, aggregate, all_undefined, compute_report, load_report, render
from .ste import load_ste
from .synthetic import (
    LearnerProfile,
    ScenarioSpec,
    expected_values,
    generate_lifetime,
    generate_ste,
    load_json,
    ste_log,
)

CONFIG_ENV = "LIFEMETRICS_CONFIG"
DEFAULT_PERF_KEY = "performance"

EXIT_OK, EXIT_INPUT, EXIT_UNDEFINED = 0, 1, 2

log = logging.getLogger("lifemetrics")


class InputError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a JSON object")
    return data


def _setting(args, cfg: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _preprocess_config(cfg: dict) -> PreprocessConfig:
    section = cfg.get("preprocess", cfg)
    try:
        return PreprocessConfig.from_dict(section)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad preprocessing config: {exc}") from None


def _emit(text: str, output: str | None):
    if output:
        try:
            Path(output).parent.mkdir(parents=True, exist_ok=True)
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {output}: {exc}") from None
    else:
        sys.stdout.write(text)


def cmd_validate(args, cfg) -> int:
    path = _setting(args, cfg, "log")
    if not path:
        raise InputError("--log is required")
    lifetime = read_log(path, _setting(args, cfg, "perf_key", DEFAULT_PERF_KEY))
    report = validate(lifetime)
    if _setting(args, cfg, "format", "text") == "json":
        text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    else:
        text = "\n".join(report.lines()) + "\n"
    _emit(text, _setting(args, cfg, "output"))
    return EXIT_OK


def cmd_compute(args, cfg) -> int:
    path = _setting(args, cfg, "log")
    if not path:
        raise InputError("--log is required")
    perf_key = _setting(args, cfg, "perf_key", DEFAULT_PERF_KEY)
    fmt = _setting(args, cfg, "format", "json")
    lifetime = read_log(path, perf_key)
    ste_dir = _setting(args, cfg, "ste_dir")
    ste = load_ste(ste_dir, perf_key) if ste_dir else None
    normalize = not (args.raw or cfg.get("raw", False))
    report = compute_report(lifetime, ste, _preprocess_config(cfg), normalize=normalize)
    _emit(render(report, fmt), _setting(args, cfg, "output"))
    if all_undefined(report):
        log.error("every metric is undefined for %s", lifetime.lifetime_id)
        return EXIT_UNDEFINED
    return EXIT_OK


def cmd_aggregate(args, cfg) -> int:
    paths = args.reports or cfg.get("reports", [])
    if not paths:
        raise InputError("no reports given")
    try:
        reports = [load_report(p) for p in paths]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise InputError(f"cannot read report: {exc}") from None
    agg = aggregate(reports)
    for w in agg.warnings:
        log.warning(w)
    _emit(render(agg, _setting(args, cfg, "format", "json")), _setting(args, cfg, "output"))
    return EXIT_OK


def cmd_synth(args, cfg) -> int:
    spec_path = _setting(args, cfg, "spec")
    profile_path = _setting(args, cfg, "profile")
    out_dir = _setting(args, cfg, "output")
    if not (spec_path and profile_path and out_dir):
        raise InputError("--spec, --profile and --output are required")
    spec = ScenarioSpec.from_dict(load_json(spec_path))
    profile = LearnerProfile.from_dict(load_json(profile_path))
    seed = _setting(args, cfg, "seed")
    if seed is not None:
        profile = profile.with_seed(int(seed))
    oracle = args.oracle or cfg.get("oracle", False)
    if oracle and profile.noise_std != 0:
        raise InputError("oracle requires zero noise")
    perf_key = _setting(args, cfg, "perf_key", DEFAULT_PERF_KEY)
    clones = int(_setting(args, cfg, "clones", 1))
    out = Path(out_dir)
    (out / "ste").mkdir(parents=True, exist_ok=True)
    for i in range(clones):
        clone = profile.with_seed(profile.seed + i)
        lifetime = generate_lifetime(spec, clone, f"lifetime-{i:03d}", perf_key)
        write_log(lifetime, out / f"lifetime-{i:03d}.jsonl")
    ste_lx = _setting(args, cfg, "ste_lx")
    lengths = {t: int(ste_lx) if ste_lx else n for t, n in spec.learn_counts().items()}
    for task, n in lengths.items():
        curve = generate_ste(task, profile, n, f"ste-{task.task_name}{task.variant_label}")
        write_log(ste_log(curve, perf_key), out / "ste" / f"{curve.source_id}.jsonl")
    if profile.noise_std == 0:
        expected = expected_values(spec, profile, lengths)
        (out / "expected.json").write_text(json.dumps(expected, sort_keys=True, indent=2) + "\n",
                                           encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lifemetrics", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check log structure and metric eligibility")
    p.add_argument("--log")
    p.add_argument("--perf-key", dest="perf_key")
    p.add_argument("--output")
    p.add_argument("--format", choices=("text", "json"))
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compute", help="compute all metrics for one lifetime")
    p.add_argument("--log")
    p.add_argument("--ste-dir", dest="ste_dir")
    p.add_argument("--perf-key", dest="perf_key")
    p.add_argument("--output")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--raw", action="store_true", help="skip smoothing, clamping and scaling")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("aggregate", help="aggregate lifetime reports across clones")
    p.add_argument("reports", nargs="*")
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "csv", "markdown"))
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("synth", help="generate synthetic lifetimes and STE curves")
    p.add_argument("--spec")
    p.add_argument("--profile")
    p.add_argument("--output", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--clones", type=int)
    p.add_argument("--ste-lx", dest="ste_lx", type=int, help="STE curve length (default: task's L2 LX count)")
    p.add_argument("--perf-key", dest="perf_key")
    p.add_argument("--oracle", action="store_true", help="fail unless expected.json can be written (needs zero noise)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except (InputError, LogFormatError, FileNotFoundError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
