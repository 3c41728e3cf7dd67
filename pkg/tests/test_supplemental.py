import itertools
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ev, lb, make_log
from lifemetrics import cumulative_gain, learn_burn, performance_recovery, theil_sen_slope
from lifemetrics.supplemental import (
    PR_CAVEAT,
    ols_slope,
    recovery_eligible_tasks,
    recovery_observations,
    recovery_time,
)


def brute_theil_sen(points):
    slopes = [(y2 - y1) / (x2 - x1) for (x1, y1), (x2, y2) in itertools.combinations(points, 2) if x1 != x2]
    return statistics.median(slopes)


def hand_ols(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / sum((a - mx) ** 2 for a in x)


class TestRecoveryTime:
    def test_starts_above(self):
        assert recovery_time([6, 1, 1], 5) == 0
        assert recovery_time([5, 1], 5) == 0

    def test_first_crossing(self):
        assert recovery_time([1, 2, 3, 4], 3) == 3

    def test_never(self):
        assert recovery_time([1, 1, 1], 5) == 4


class TestTheilSen:
    def test_examples(self):
        assert theil_sen_slope([(x, 2 * x) for x in range(6)]) == pytest.approx(2)
        assert theil_sen_slope([(1, 5), (2, 3), (3, 1)]) == pytest.approx(-2)
        assert theil_sen_slope([(1, 0), (2, 0), (3, 100)]) == pytest.approx(50)
        assert theil_sen_slope([1, 2, 3], [0, 0, 100]) == pytest.approx(50)

    def test_even_count_midpoint(self):
        pts = [(0, 0), (1, 1), (2, 4), (3, 3)]
        assert theil_sen_slope(pts) == pytest.approx(brute_theil_sen(pts))

    def test_duplicate_x(self):
        assert theil_sen_slope([(1, 1), (1, 5), (2, 3)]) == pytest.approx(brute_theil_sen([(1, 1), (1, 5), (2, 3)]))
        with pytest.raises(ValueError):
            theil_sen_slope([(1, 1), (1, 2)])

    @given(st.lists(st.tuples(st.integers(-20, 20), st.floats(-1e3, 1e3)), min_size=2, max_size=50))
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_force(self, pts):
        if len({x for x, _ in pts}) < 2:
            return
        assert theil_sen_slope(pts) == pytest.approx(brute_theil_sen(pts), rel=1e-9, abs=1e-9)


def recovery_log(times, n=20, tlp=10.0):
    # first block ends at ``tlp``; each later block recovers after the given LX count
    blocks = [lb("A", [tlp] * n)]
    for t in times:
        if t == 0:
            values = [tlp] * n
        else:
            values = [0.0] * (t - 1) + [tlp] * (n - t + 1)
        blocks += [ev(A=1.0), lb("A", values)]
    return make_log(blocks)


class TestPerformanceRecovery:
    def test_decreasing_times(self):
        log = recovery_log([6, 4, 2])
        obs = recovery_observations(log)
        assert [(o.lb_index, o.recovery_time) for o in obs[next(iter(obs))]] == [(2, 6), (3, 4), (4, 2)]
        pr = performance_recovery(log)
        assert pr.value == pytest.approx(2.0)
        assert pr.notes[0] == PR_CAVEAT

    def test_constant_and_increasing(self):
        assert performance_recovery(recovery_log([3, 3, 3])).value == 0.0
        assert performance_recovery(recovery_log([2, 5, 9])).value < 0

    def test_insufficient(self):
        log = recovery_log([3])
        pr = performance_recovery(log)
        assert pr.value is None
        assert recovery_eligible_tasks(log) == []

    def test_never_recovers(self):
        log = make_log([lb("A", [10] * 10), lb("A", [1] * 7), lb("A", [1] * 7)])
        obs = list(recovery_observations(log).values())[0]
        assert obs[0].recovery_time == 8
        assert obs[1].recovery_time == 0


class TestCumulativeGain:
    def test_mixed(self):
        log = make_log([lb("A", range(10)), lb("A", [3] * 10), lb("A", range(10, 0, -1))])
        cg = cumulative_gain(log)
        assert [v for _, v in cg.sub_values] == [1, 0, -1]
        assert cg.value == 0

    def test_all_improving(self):
        assert cumulative_gain(make_log([lb("A", range(5)), ev(A=1), lb("B", range(3))])).value == 1

    def test_noisy_ramp(self):
        rng = random.Random(7)
        y = [0.5 * i + rng.gauss(0, 1) for i in range(20)]
        cg = cumulative_gain(make_log([lb("A", y)]))
        assert cg.extras["slopes"][0][1] == pytest.approx(hand_ols(list(range(20)), y))
        assert cg.value == 1

    def test_epsilon_band(self):
        y = [1 + 1e-4 * i for i in range(20)]
        assert cumulative_gain(make_log([lb("A", y)])).value == 0
        assert cumulative_gain(make_log([lb("A", y)]), epsilon=1e-5).value == 1


class TestLearnBurn:
    def test_continuous_line(self):
        y = [0.5 * i for i in range(30)]
        log = make_log([lb("A", y[:10]), lb("A", y[10:20]), lb("B", y[20:])])
        assert learn_burn(log).value == pytest.approx(1.0)

    def test_twice_global(self):
        n = 10
        c = 2 * n - (4 * n * n - 1) / (3 * n)  # offset that makes the overall slope exactly 1
        first = [2.0 * i for i in range(n)]
        second = [2.0 * i + c for i in range(n)]
        assert hand_ols(list(range(2 * n)), first + second) == pytest.approx(1.0)
        lbm = learn_burn(make_log([lb("A", first), lb("A", second)]))
        assert lbm.value == pytest.approx(2.0)
        assert lbm.extras["average_learn_rate"][0][1] == pytest.approx(1.0)

    def test_staircase(self):
        log = make_log([lb("A", [k] * 10) for k in range(1, 5)])
        assert learn_burn(log).value == pytest.approx(0.0, abs=1e-12)

    def test_against_hand_ols(self):
        rng = random.Random(3)
        blocks = [[rng.uniform(0, 10) + 0.3 * i for i in range(rng.randint(2, 15))] for _ in range(4)]
        flat = [v for b in blocks for v in b]
        rate = hand_ols(list(range(len(flat))), flat)
        want = np.mean([hand_ols(list(range(len(b))), b) / rate for b in blocks[1:]])
        got = learn_burn(make_log([lb("A", b) for b in blocks]))
        assert got.value == pytest.approx(want, rel=1e-9)

    def test_undefined(self):
        assert learn_burn(make_log([lb("A", range(5))])).value is None
        flat = learn_burn(make_log([lb("A", [1] * 5), lb("A", [1] * 5)]))
        assert flat.reason == "average learn rate is zero"

    def test_ols_matches_hand(self):
        x, y = [0, 1, 2, 5], [1, 3, 2, 9]
        assert ols_slope(x, y) == pytest.approx(hand_ols(x, y))
