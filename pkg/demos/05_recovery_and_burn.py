"""
Recovery, gain and burn on a learning-only lifetime
===================================================

Lifetimes without evaluation blocks still support the learning-curve
metrics: how quickly performance recovers after a task switch, whether
each block trends upward, and how hard the agent works after a change.
"""

import numpy as np

from lifemetrics import (
    ExperienceRecord,
    LearnerProfile,
    LifetimeLog,
    ScenarioSpec,
    TaskKey,
    TaskProfile,
    generate_lifetime,
)
from lifemetrics.supplemental import (
    cumulative_gain,
    learn_burn,
    performance_recovery,
    recovery_observations,
)

a, b = TaskKey("sort"), TaskKey("merge")
spec = ScenarioSpec.build(*[blk for _ in range(5) for blk in (("learn", [("sort", 150)]), ("learn", [("merge", 150)]))])

# %%
# The synthetic agent forgets each task a little while learning the other.
# Every return starts below the previous terminal performance, and the
# target keeps creeping toward the asymptote where progress is slow, so
# recovery takes longer each time and PR comes out negative.
profile = LearnerProfile({a: TaskProfile(100, 0.01, 0, 0.0005), b: TaskProfile(100, 0.01, 0, 0.0005)})
log = generate_lifetime(spec, profile, "switching")

for task, rows in recovery_observations(log).items():
    print(task, [o.recovery_time for o in rows])
print("PR", performance_recovery(log).value)

# %%
# An agent whose learning speeds up with experience shows the opposite:
# each block regains the previous level sooner, and PR > 0.
records, exp = [], 0
for k in range(5):
    # every block climbs from 30 to a cap of 90, a little faster each time
    curve = np.minimum(30 + 0.5 * (k + 1) * np.arange(150), 90.0)
    records += [ExperienceRecord(exp + i, k, "learn", a, {"performance": float(v)}) for i, v in enumerate(curve)]
    exp += 150
faster = LifetimeLog.from_records(records, "performance", "faster")
print([o.recovery_time for o in recovery_observations(faster)[a]])
pr = performance_recovery(faster)
print("PR", pr.value, pr.notes)

# %%
# Each block's least-squares trend is summarized as +1, 0 or -1.
print("CG", cumulative_gain(log).value)

# %%
# Learn Burn divides the within-block slopes after each change by the
# slope across the whole lifetime.  Sawtooth curves climb steeply inside
# blocks while the overall trend is gentle, so LB comes out well above 1.
lbm = learn_burn(log)
print("LB", round(lbm.value, 3), "average learn rate", np.round(lbm.extras["average_learn_rate"][0][1], 4))
