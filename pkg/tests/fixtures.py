"""Noise-free synthetic scenarios shared by the synthetic and acceptance tests."""

from lifemetrics import LearnerProfile, ScenarioSpec, TaskKey, TaskProfile

BLUE, GREEN, RED = TaskKey("blue"), TaskKey("green"), TaskKey("red")
FOG = TaskKey.from_params("blue", {"weather": "fog"})


def _eval(*tasks, n=100):
    return ("eval", [(t, n) for t in tasks])


def _learn(task, n=200):
    return ("learn", [(task, n)])


def alternating(n_cycles=2, lx=200, ex=100, tasks=(BLUE, GREEN)):
    """EB over all tasks between every learning block, cycling through ``tasks``."""
    blocks = [_eval(*tasks, n=ex)]
    for _ in range(n_cycles):
        for t in tasks:
            blocks += [_learn(t, lx), _eval(*tasks, n=ex)]
    return ScenarioSpec.build(*blocks)


def figure_positive() -> tuple[ScenarioSpec, LearnerProfile]:
    """Two tasks that help each other; the second benefits most."""
    spec = ScenarioSpec.build(_eval(BLUE, GREEN), _learn(BLUE), _eval(BLUE, GREEN), _learn(GREEN),
                              _eval(BLUE, GREEN), _learn(BLUE), _eval(BLUE, GREEN))
    profile = LearnerProfile({BLUE: TaskProfile(90, 0.01, 10), GREEN: TaskProfile(90, 0.01, 10)},
                             {(BLUE, GREEN): 0.4, (GREEN, BLUE): 0.1})
    return spec, profile


def figure_negative() -> tuple[ScenarioSpec, LearnerProfile]:
    """Two tasks that interfere and are forgotten while the other is learned."""
    spec, _ = figure_positive()
    profile = LearnerProfile({BLUE: TaskProfile(90, 0.01, 10, 0.002), GREEN: TaskProfile(90, 0.01, 10, 0.002)},
                             {(BLUE, GREEN): -0.1, (GREEN, BLUE): -0.1})
    return spec, profile


def _two(a=90.0, r=0.01, s=10.0, f=0.0, **kw):
    return {BLUE: TaskProfile(a, r, s, f), GREEN: TaskProfile(kw.get("a2", a), kw.get("r2", r), kw.get("s2", s),
                                                            kw.get("f2", f))}


def oracle_fixtures():
    """``(name, spec, profile)`` triples spanning transfer, forgetting, disjoint and saturating regimes."""
    out = []
    pos_spec, pos = figure_positive()
    neg_spec, neg = figure_negative()
    out += [("figure-positive", pos_spec, pos), ("figure-negative", neg_spec, neg)]

    for coef in (0.1, 0.25, 0.5):
        out.append((f"transfer-{coef}", alternating(2), LearnerProfile(_two(), {(BLUE, GREEN): coef, (GREEN, BLUE): coef / 4})))
    out.append(("transfer-asymmetric", alternating(3, lx=150), LearnerProfile(_two(r2=0.02), {(BLUE, GREEN): 0.3})))

    for f in (0.0005, 0.002, 0.01):
        out.append((f"forgetting-{f}", alternating(3), LearnerProfile(_two(f=f))))
    out.append(("forgetting-interference", alternating(2), LearnerProfile(_two(f=0.001), {(BLUE, GREEN): -0.2, (GREEN, BLUE): -0.2})))
    out.append(("forgetting-one-task", alternating(3), LearnerProfile(_two(f=0.0, f2=0.004))))

    out.append(("disjoint", alternating(2), LearnerProfile(_two())))
    out.append(("disjoint-three", alternating(2, lx=120, tasks=(BLUE, GREEN, RED)),
                LearnerProfile({**_two(), RED: TaskProfile(50, 0.03, 5)})))
    out.append(("disjoint-scales", alternating(3), LearnerProfile(_two(a=1.0, s=0.1, a2=500.0, s2=20.0))))

    for r in (0.05, 0.1, 0.3):
        out.append((f"saturating-{r}", alternating(3, lx=100), LearnerProfile(_two(r=r, f=0.001))))
    out.append(("saturating-mixed", alternating(2, lx=300), LearnerProfile(_two(r=0.08, r2=0.005), {(GREEN, BLUE): 0.2})))

    # multi-task learning blocks and a task variant
    spec = ScenarioSpec.build(_eval(BLUE, FOG), ("learn", [(BLUE, 80), (FOG, 40), (BLUE, 80)]), _eval(BLUE, FOG),
                              _learn(FOG, 150), _eval(BLUE, FOG), _learn(BLUE, 100), _eval(BLUE, FOG))
    out.append(("variants-mixed-block", spec, LearnerProfile(
        {BLUE: TaskProfile(80, 0.02, 5, 0.001), FOG: TaskProfile(60, 0.015, 5)}, {(BLUE, FOG): 0.3, (FOG, BLUE): 0.05})))

    # no evaluation blocks: only learning-curve metrics apply
    spec = ScenarioSpec.build(_learn(BLUE, 300), _learn(BLUE, 150), _learn(BLUE, 300))
    out.append(("learning-only", spec, LearnerProfile({BLUE: TaskProfile(120, 0.004, 20)})))
    spec = ScenarioSpec.build(*[b for _ in range(4) for b in (_learn(BLUE, 120), _learn(GREEN, 60))])
    out.append(("learning-only-forgetting", spec, LearnerProfile(_two(r=0.02, f=0.003))))
    return out
