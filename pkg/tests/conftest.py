import pytest

from lifemetrics import ExperienceRecord, LifetimeLog, TaskKey

KEY = "reward"


def make_log(blocks, perf_key=KEY, lifetime_id="t"):
    """Build a log from ``[(block_type, [(task, [values...]), ...]), ...]``."""
    records = []
    exp = 0
    for block_num, (block_type, items) in enumerate(blocks):
        for task, values in items:
            key = task if isinstance(task, TaskKey) else TaskKey(task)
            for v in values:
                records.append(ExperienceRecord(exp, block_num, block_type, key, {perf_key: float(v)}, lifetime_id))
                exp += 1
    return LifetimeLog.from_records(records, perf_key, lifetime_id)


def ev(**tasks):
    return ("eval", [(t, v if isinstance(v, list) else [v]) for t, v in tasks.items()])


def lb(task, values):
    return ("learn", [(task, list(values))])


@pytest.fixture
def log_factory():
    return make_log


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.TITLES):
        if n not in module.RESULTS:
            terminalreporter.write_line(f"[SKIP] criterion {n}: {module.TITLES[n]} (not run)")
            continue
        ok, detail = module.RESULTS[n]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {module.TITLES[n]}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
