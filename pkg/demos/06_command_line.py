"""
From synthetic clones to an aggregate report on the command line
================================================================

The ``lifemetrics`` command covers the whole loop: generate noisy clones,
compute a report per clone, then aggregate.  It is driven here through
:func:`lifemetrics.cli.main` so the script runs anywhere.
"""

import json
import tempfile
from pathlib import Path

from lifemetrics import LearnerProfile, ScenarioSpec, TaskKey, TaskProfile
from lifemetrics.cli import main

work = Path(tempfile.mkdtemp(prefix="lifemetrics-demo-"))
blue, green = TaskKey("blue"), TaskKey("green")
both = [("blue", 100), ("green", 100)]
spec = ScenarioSpec.build(("eval", both), ("learn", [("blue", 200)]), ("eval", both),
                          ("learn", [("green", 200)]), ("eval", both))
profile = LearnerProfile({blue: TaskProfile(90, 0.01, 10), green: TaskProfile(90, 0.01, 10)},
                         {(blue, green): 0.4}, noise_std=2.0, seed=7)
(work / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2))
(work / "profile.json").write_text(json.dumps(profile.to_dict(), indent=2))

# %%
# ``synth`` writes one log per clone plus an STE curve per task.
main(["synth", "--spec", str(work / "spec.json"), "--profile", str(work / "profile.json"),
      "--output", str(work / "data"), "--clones", "3"])
print(sorted(p.name for p in (work / "data").rglob("*.jsonl")))

# %%
# ``validate`` and ``compute`` work one lifetime at a time.
main(["validate", "--log", str(work / "data" / "lifetime-000.jsonl")])
reports = []
for i in range(3):
    out = work / f"report-{i}.json"
    main(["compute", "--log", str(work / "data" / f"lifetime-{i:03d}.jsonl"),
          "--ste-dir", str(work / "data" / "ste"), "--output", str(out)])
    reports.append(str(out))

# %%
# ``aggregate`` gives mean, sample standard deviation and count per metric.
main(["aggregate", *reports, "--format", "markdown"])
print(f"files left in {work}")
