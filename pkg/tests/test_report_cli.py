import csv
import io
import json
import statistics

import pytest

from conftest import ev, lb, make_log
from fixtures import BLUE, GREEN, alternating, figure_positive
from lifemetrics import SteStore, aggregate, compute_report, generate_lifetime, generate_ste, render
from lifemetrics.cli import main
from lifemetrics.lifetime import write_log
from lifemetrics.metrics import MetricResult
from lifemetrics.report import LifetimeReport, interpretation, load_report
from lifemetrics.synthetic import ste_log


def positive_report(**kw):
    spec, profile = figure_positive()
    log = generate_lifetime(spec, profile, "pos")
    ste = SteStore.from_curves([generate_ste(t, profile, n) for t, n in spec.learn_counts().items()])
    return compute_report(log, ste, **kw)


def fake_report(lid, **values):
    metrics = {code: MetricResult.from_sub_values(code, [("x", v)] if v is not None else [])
               for code, v in values.items()}
    for code in ("PM", "FT", "BT", "RP", "SE", "PR", "CG", "LB"):
        metrics.setdefault(code, MetricResult.undefined(code, "not in fixture"))
    return LifetimeReport(lid, "performance", {}, metrics, [])


class TestReport:
    def test_all_metrics_populated_table2_shape(self):
        _, profile = figure_positive()
        spec = alternating(3, tasks=(BLUE, GREEN))
        log = generate_lifetime(spec, profile, "t2")
        ste = SteStore.from_curves([generate_ste(t, profile, n) for t, n in spec.learn_counts().items()])
        rep = compute_report(log, ste)
        assert [c for c, m in rep.metrics.items() if not m.defined] == []

    def test_two_learning_blocks_give_no_recovery_trend(self):
        assert positive_report().metrics["PR"].reason == "no task has three or more learning blocks"

    def test_table1_shape(self):
        log = make_log([lb("T1", range(20)), lb("T1", range(10)), lb("T1", range(20))])
        rep = compute_report(log)
        for code in ("PM", "FT", "BT"):
            assert rep.metrics[code].reason == "no evaluation blocks"
        for code in ("PR", "CG", "LB"):
            assert rep.metrics[code].defined
        assert rep.metrics["RP"].reason == "no STE curves supplied"

    def test_json_round_trip_byte_stable(self):
        text = render(positive_report())
        again = render(LifetimeReport.from_dict(json.loads(text)))
        assert again == text

    def test_raw_mode_caveat(self):
        rep = positive_report(normalize=False)
        assert rep.normalization is None
        assert "metrics computed on raw, unnormalized values" in rep.caveats

    def test_plotdata_rows(self):
        rep = positive_report()
        rows = list(csv.DictReader(io.StringIO(render(rep, "plotdata"))))
        assert len(rows) == rep.scenario["n_lx"] + rep.scenario["n_ex"]
        assert set(rows[0]) == {"task", "exp_num", "raw", "processed", "block_num", "block_type"}
        assert all(1 <= float(r["processed"]) <= 101 for r in rows)

    def test_csv(self):
        rows = list(csv.DictReader(io.StringIO(render(positive_report(), "csv"))))
        assert {r["metric"] for r in rows} == {"PM", "FT", "BT", "RP", "SE", "PR", "CG", "LB"}
        pm = next(r for r in rows if r["metric"] == "PM" and r["kind"] == "value")
        assert float(pm["value"]) > 0

    def test_markdown(self):
        md = render(positive_report(), "markdown")
        assert "PM > 0" in md
        assert "## Context" in md and "compare only across like scenarios" in md

    def test_interpretation(self):
        assert interpretation("RP", 1.2).startswith("RP > 1")
        assert interpretation("BT", -0.1).startswith("BT < 0")
        assert interpretation("PM", 0.0).startswith("PM = 0")
        assert interpretation("SE", None) == "SE undefined"

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(positive_report(), "xml")


class TestAggregate:
    def test_three_clones(self):
        agg = aggregate([fake_report(f"c{i}", PM=v) for i, v in enumerate([0.1, 0.2, 0.3])])
        pm = agg.metrics["PM"]
        assert pm.mean == pytest.approx(0.2)
        assert pm.std == pytest.approx(statistics.stdev([0.1, 0.2, 0.3]))
        assert pm.count == 3

    def test_exclusion(self):
        agg = aggregate([fake_report("a", SE=1.0), fake_report("b", SE=None), fake_report("c", SE=2.0)])
        assert agg.metrics["SE"].count == 2
        assert agg.metrics["FT"].count == 0 and agg.metrics["FT"].mean is None

    def test_single(self):
        agg = aggregate([fake_report("a", PM=0.7)])
        assert agg.metrics["PM"].mean == 0.7 and agg.metrics["PM"].std == 0.0

    def test_mixed_keys_warn(self):
        a, b = fake_report("a", PM=1.0), fake_report("b", PM=2.0)
        b.perf_key = "reward"
        assert "different perf keys" in aggregate([a, b]).warnings[0]

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_renderings(self):
        agg = aggregate([fake_report("a", PM=1.0), fake_report("b", PM=3.0)])
        assert json.loads(render(agg))["metrics"]["PM"]["mean"] == 2.0
        assert "| Performance Maintenance (PM) | 2 |" in render(agg, "markdown")
        assert render(agg, "csv").splitlines()[0] == "metric,mean,std,count"
        with pytest.raises(ValueError):
            render(agg, "plotdata")


@pytest.fixture
def synth_inputs(tmp_path):
    spec, profile = figure_positive()
    (tmp_path / "spec.json").write_text(json.dumps(spec.to_dict()))
    (tmp_path / "profile.json").write_text(json.dumps(profile.to_dict()))
    noisy = dict(profile.to_dict(), noise_std=1.5)
    (tmp_path / "noisy.json").write_text(json.dumps(noisy))
    return tmp_path


class TestCli:
    def test_synth_compute_aggregate(self, synth_inputs, capsys):
        d = synth_inputs
        out = d / "run"
        assert main(["synth", "--spec", str(d / "spec.json"), "--profile", str(d / "noisy.json"),
                     "--output", str(out), "--seed", "3", "--clones", "2"]) == 0
        assert sorted(p.name for p in out.glob("*.jsonl")) == ["lifetime-000.jsonl", "lifetime-001.jsonl"]
        assert not (out / "expected.json").exists()
        reports = []
        for i in range(2):
            rep = d / f"r{i}.json"
            code = main(["compute", "--log", str(out / f"lifetime-00{i}.jsonl"), "--ste-dir", str(out / "ste"),
                         "--output", str(rep)])
            assert code == 0
            reports.append(str(rep))
        assert main(["aggregate", *reports, "--output", str(d / "agg.json")]) == 0
        agg = json.loads((d / "agg.json").read_text())
        assert agg["metrics"]["PM"]["count"] == 2
        assert agg["lifetime_ids"] == ["lifetime-000", "lifetime-001"]

    def test_synth_writes_oracle_when_noise_free(self, synth_inputs):
        d = synth_inputs
        assert main(["synth", "--spec", str(d / "spec.json"), "--profile", str(d / "profile.json"),
                     "--output", str(d / "o")]) == 0
        expected = json.loads((d / "o" / "expected.json").read_text())
        code = main(["compute", "--log", str(d / "o" / "lifetime-000.jsonl"), "--ste-dir", str(d / "o" / "ste"),
                     "--raw", "--output", str(d / "r.json")])
        assert code == 0
        rep = load_report(d / "r.json")
        for k, v in expected.items():
            assert rep.value(k) == (pytest.approx(v, rel=1e-9) if v is not None else None)

    def test_synth_oracle_with_noise_fails(self, synth_inputs, caplog):
        d = synth_inputs
        code = main(["synth", "--spec", str(d / "spec.json"), "--profile", str(d / "noisy.json"),
                     "--output", str(d / "x"), "--oracle"])
        assert code == 1
        assert "oracle requires zero noise" in caplog.text

    def test_synth_deterministic(self, synth_inputs):
        d = synth_inputs
        for name in ("a", "b"):
            main(["synth", "--spec", str(d / "spec.json"), "--profile", str(d / "noisy.json"),
                  "--output", str(d / name), "--seed", "9"])
        files = sorted(p.relative_to(d / "a") for p in (d / "a").rglob("*.jsonl"))
        assert files
        for f in files:
            assert (d / "a" / f).read_bytes() == (d / "b" / f).read_bytes()

    def test_validate(self, tmp_path, capsys):
        log = make_log([ev(T1=1, T2=1), lb("T1", [1, 2, 3]), ev(T1=3, T2=2), lb("T2", [2, 3, 4]), ev(T1=3, T2=4)],
                       perf_key="performance")
        write_log(log, tmp_path / "t2.jsonl")
        assert main(["validate", "--log", str(tmp_path / "t2.jsonl")]) == 0
        text = capsys.readouterr().out
        assert "FT computable for pair T1->T2" in text
        assert main(["validate", "--log", str(tmp_path / "t2.jsonl"), "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["computable"]["BT"] is True

    def test_missing_perf_key(self, tmp_path, caplog):
        write_log(make_log([lb("A", [1, 2])]), tmp_path / "a.jsonl")
        assert main(["compute", "--log", str(tmp_path / "a.jsonl"), "--perf-key", "score"]) == 1
        assert "score" in caplog.text

    def test_all_undefined_exit(self, tmp_path, capsys):
        write_log(make_log([ev(A=1)], perf_key="performance"), tmp_path / "e.jsonl")
        assert main(["compute", "--log", str(tmp_path / "e.jsonl")]) == 2

    def test_config_file_and_env(self, tmp_path, monkeypatch, capsys):
        write_log(make_log([lb("A", range(50)), ev(A=3)], perf_key="reward"), tmp_path / "a.jsonl")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"perf_key": "reward", "format": "markdown", "preprocess": {"scale_max": 11}}))
        monkeypatch.setenv("LIFEMETRICS_CONFIG", str(cfg))
        assert main(["compute", "--log", str(tmp_path / "a.jsonl")]) == 0
        assert capsys.readouterr().out.startswith("# Lifelong-learning metrics")
        assert main(["compute", "--log", str(tmp_path / "a.jsonl"), "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["config"]["scale_max"] == 11

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"preprocess": {"scale_min": -1}}))
        assert main(["--config", str(cfg), "compute", "--log", "nowhere.jsonl"]) == 1

    def test_missing_log(self, tmp_path):
        assert main(["compute", "--log", str(tmp_path / "missing.jsonl")]) == 1
        assert main(["compute"]) == 1

    def test_ste_log_round_trip(self, tmp_path):
        _, profile = figure_positive()
        curve = generate_ste(next(iter(profile.tasks)), profile, 20)
        write_log(ste_log(curve, "performance"), tmp_path / "s.jsonl")
        assert (tmp_path / "s.jsonl").read_text().count("\n") == 20
