"""
Comparing against a single-task expert
======================================

Relative Performance sums the learning curve against the expert's over
their common length.  Sample Efficiency compares where each curve
saturates and how soon.
"""

import numpy as np

from lifemetrics import SteCurve, SteStore, TaskKey, relative_performance, sample_efficiency, saturation
from lifemetrics.lifetime import ExperienceRecord, LifetimeLog
from lifemetrics.preprocess import smoothing_window

task = TaskKey("stack")
t = np.arange(400)
# piecewise-linear curves that level off: the lifelong learner starts
# higher, climbs faster and settles slightly higher
lifelong = np.minimum(20 + 0.6 * t, 80.0)
expert = np.minimum(10 + 0.35 * t, 78.0)

log = LifetimeLog.from_records(
    [ExperienceRecord(i, 0, "learn", task, {"success": float(v)}) for i, v in enumerate(lifelong)], "success")
ste = SteStore.from_curves([SteCurve(task, expert, "expert-0")])

# %%
# Saturation is read off a trailing rolling mean with the smoothing window
# length.  The saturation value is its maximum and experiences-to-saturation
# (ETS) the first LX reaching it.
w = smoothing_window(t.size)
for name, curve in (("lifelong", lifelong), ("expert", expert)):
    sat, ets = saturation(curve, w)
    print(f"{name:8s} saturation {sat:6.2f} after {ets} LXs")

# %%
rp = relative_performance(log, ste)
se = sample_efficiency(log, ste)
print(f"RP = {rp.value:.3f}")
print(f"SE = {se.value:.3f}")

# %%
# A curve that collapses at the end is not at steady state, so SE skips it
# and says why.
broken = lifelong.copy()
broken[-80:] = 20
log2 = log.with_values(broken)
print(sample_efficiency(log2, ste).notes)
