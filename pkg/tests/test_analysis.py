from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairflow.analysis import (
    TradeoffPoint,
    TrialRef,
    best_tradeoff,
    bootstrap_means,
    dominates,
    exact_mean,
    pareto_frontier,
    percentile_interval,
    summarize_scores,
)
from fairflow.errors import TooFewTrials


def pts(pairs):
    return [TradeoffPoint(p, f, TrialRef("d", "m", i)) for i, (p, f) in enumerate(pairs)]


def brute_frontier(points):
    return {p.trial_ref for p in points if not any(dominates(q, p) for q in points)}


coords = st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=80)


def test_four_point_example():
    p = pts([(0.9, 0.5), (0.8, 0.8), (0.7, 0.7), (0.6, 0.9)])
    front = pareto_frontier(p)
    assert [q.trial_ref.trial_id for q in front] == [0, 1, 3]
    assert best_tradeoff(p, 0.5).trial_ref.trial_id == 1


def test_duplicates_both_survive():
    p = pts([(0.5, 0.5), (0.5, 0.5), (0.4, 0.4)])
    assert len(pareto_frontier(p)) == 2


@settings(max_examples=150, deadline=None)
@given(coords)
def test_frontier_matches_brute_force(pairs):
    p = pts([(a / 12, b / 12) for a, b in pairs])
    front = pareto_frontier(p)
    assert {q.trial_ref for q in front} == brute_frontier(p)
    perfs = [q.performance for q in front]
    assert perfs == sorted(perfs, reverse=True)


@settings(max_examples=150, deadline=None)
@given(coords, st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
def test_best_tradeoff_is_on_frontier(pairs, alpha):
    p = pts([(a / 12, b / 12) for a, b in pairs])
    best = best_tradeoff(p, alpha)
    assert best.trial_ref in brute_frontier(p)
    assert best.combined(alpha) == max(q.combined(alpha) for q in p)


def test_best_tradeoff_validates_inputs():
    with pytest.raises(ValueError):
        best_tradeoff([], 0.5)
    with pytest.raises(ValueError):
        best_tradeoff(pts([(1, 1)]), 1.5)


def test_exact_mean_avoids_rounding_drift():
    assert exact_mean([0.1] * 10) == 0.1
    assert exact_mean([1e16, 1.0, -1e16]) == 1.0 / 3


def test_zero_variance_gives_degenerate_interval():
    s = summarize_scores("m", [0.7] * 12, 200, 0.95, seed=1)
    assert s.point_estimate == s.ci_low == s.ci_high == 0.7


def test_same_seed_same_interval():
    scores = list(np.random.default_rng(0).random(20))
    a = summarize_scores("m", scores, 300, 0.9, seed=5)
    b = summarize_scores("m", scores, 300, 0.9, seed=5)
    c = summarize_scores("m", scores, 300, 0.9, seed=6)
    assert a == b
    assert (a.ci_low, a.ci_high) != (c.ci_low, c.ci_high)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=20), st.integers(0, 2**32), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_intervals_nest_on_fixed_resamples(values, seed, l1, l2):
    means = bootstrap_means(values, 100, seed)
    lo_level, hi_level = sorted((l1, l2))
    inner, outer = percentile_interval(means, lo_level), percentile_interval(means, hi_level)
    assert outer[0] <= inner[0] <= inner[1] <= outer[1]


def test_interval_matches_sorted_resample_quantiles():
    means = bootstrap_means([0.1, 0.4, 0.35, 0.9, 0.6], 999, seed=3)
    lo, hi = percentile_interval(means, 0.9)
    s = np.sort(means)

    def linear(q):
        h = (len(s) - 1) * q
        k = int(np.floor(h))
        return s[k] + (h - k) * (s[k + 1] - s[k])

    assert lo == pytest.approx(linear(0.05), abs=1e-12)
    assert hi == pytest.approx(linear(0.95), abs=1e-12)


def test_bootstrap_resample_oracle():
    from fairflow.rng import Xoshiro256StarStar

    values = [0.2, 0.5, 0.9]
    rng = Xoshiro256StarStar(8)
    expected = [sum(values[rng.below(3)] for _ in range(3)) / 3 for _ in range(5)]
    assert np.allclose(bootstrap_means(values, 5, 8), expected, atol=1e-15)


def test_too_few_trials():
    with pytest.raises(TooFewTrials):
        summarize_scores("m", [0.5], 10, 0.95, seed=0)
