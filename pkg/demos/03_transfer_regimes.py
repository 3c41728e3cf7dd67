"""
Helpful and harmful task sequences
==================================

Two synthetic learners meet the same block sequence.  One carries skills
across tasks; the other forgets and interferes.  The metrics tell them
apart.
"""

from lifemetrics import (
    LearnerProfile,
    ScenarioSpec,
    SteStore,
    TaskKey,
    TaskProfile,
    compute_report,
    generate_lifetime,
    generate_ste,
)
from lifemetrics.report import interpretation

blue, green = TaskKey("blue"), TaskKey("green")
both = [("blue", 100), ("green", 100)]
spec = ScenarioSpec.build(
    ("eval", both), ("learn", [("blue", 200)]),
    ("eval", both), ("learn", [("green", 200)]),
    ("eval", both), ("learn", [("blue", 200)]),
    ("eval", both),
)

# %%
# Both learners share the growth law: each LX closes 1% of the remaining
# gap to the asymptote.  The first also lifts the other task while it
# learns; the second pushes it down and forgets 0.2% of its progress per LX.
helpful = LearnerProfile({blue: TaskProfile(90, 0.01, 10), green: TaskProfile(90, 0.01, 10)},
                         {(blue, green): 0.4, (green, blue): 0.1})
harmful = LearnerProfile({blue: TaskProfile(90, 0.01, 10, 0.002), green: TaskProfile(90, 0.01, 10, 0.002)},
                         {(blue, green): -0.1, (green, blue): -0.1})

# %%
# Single-task experts see only their own task for as many LXs as the
# lifelong learner spent on it.
for name, profile in (("helpful", helpful), ("harmful", harmful)):
    log = generate_lifetime(spec, profile, name)
    ste = SteStore.from_curves([generate_ste(t, profile, n) for t, n in spec.learn_counts().items()])
    report = compute_report(log, ste)
    print(f"--- {name}")
    for code in ("PM", "FT", "BT", "RP", "SE"):
        print(f"  {code} {report.value(code):+.3f}  {interpretation(code, report.value(code))}")

# %%
# The transfer values come with their per-pair breakdown.
report = compute_report(generate_lifetime(spec, helpful))
print(report.metrics["FT"].sub_values, report.metrics["FT"].extras["ratio"])
