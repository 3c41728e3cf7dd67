"""
Smoothing, clamping and scaling
===============================

Walk one noisy learning curve through the preprocessing pipeline step by
step and compare the result with :func:`lifemetrics.preprocess`.
"""

import numpy as np

from lifemetrics import (
    PreprocessConfig,
    TaskKey,
    clamp_and_scale,
    compute_clamp_bounds,
    preprocess,
    smooth_block,
    smoothing_window,
)
from lifemetrics.lifetime import ExperienceRecord, LifetimeLog

rng = np.random.default_rng(1)
task = TaskKey("navigate", '{"weather":"fog"}')
n = 300
raw = 40 * (1 - np.exp(-np.arange(n) / 60)) + rng.normal(0, 3, n)
raw[[50, 51, 200]] = [250, -90, 180]  # a few wild values

# %%
# Smoothing uses a flat window whose length is a fifth of the block,
# capped at 100, with the edge values repeated so the output keeps the
# input's length.
L = smoothing_window(n)
smoothed = smooth_block(raw)
print(f"window length for {n} LXs: {L}")
print("raw spread     :", np.ptp(raw).round(2))
print("smoothed spread:", np.ptp(smoothed).round(2))

# %%
# Clamp bounds are the 10th and 90th percentiles of the smoothed values
# (pooled with evaluation and expert values of the same task variant when
# there are any).  Everything outside is clamped, then mapped onto [1, 101].
lo, hi = compute_clamp_bounds(smoothed)
scaled = clamp_and_scale(smoothed, lo, hi)
print(f"clamp bounds: ({lo:.2f}, {hi:.2f})")
print("scaled range:", scaled.min(), scaled.max())

# %%
# The library does the same in one call, per block and per task variant.
records = [ExperienceRecord(i, 0, "learn", task, {"score": float(v)}) for i, v in enumerate(raw)]
out = preprocess(LifetimeLog.from_records(records, "score"))
print("matches the manual walk:", np.allclose(out.log.values(), scaled))
print("bounds kept for reporting:", out.params.to_dict()["bounds"])

# %%
# A narrower clamp keeps more of the curve's shape at the top.
cfg = PreprocessConfig(clamp_low_pct=5, clamp_high_pct=99)
wide = preprocess(LifetimeLog.from_records(records, "score"), config=cfg)
print("values at 101 (10/90):", int(np.sum(out.log.values() == 101)))
print("values at 101 (5/99): ", int(np.sum(wide.log.values() == 101)))
