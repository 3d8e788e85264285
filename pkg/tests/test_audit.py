from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairflow.audit import (
    Audit,
    ReferencePolicy,
    binarize,
    disparities,
    fairness_score,
    group_confusion,
    group_metrics,
    performance,
    tpr_at_fpr,
)
from fairflow.errors import UnknownGroup, UnknownMetric, ZeroReferenceMetric


def naive_rates(decisions, labels, groups, group):
    rows = [(d, y) for d, y, g in zip(decisions, labels, groups) if g == group]
    tp = sum(1 for d, y in rows if d == 1 and y == 1)
    fp = sum(1 for d, y in rows if d == 1 and y == 0)
    tn = sum(1 for d, y in rows if d == 0 and y == 0)
    fn = sum(1 for d, y in rows if d == 0 and y == 1)

    def r(a, b):
        return None if b == 0 else a / b

    return {
        "tpr": r(tp, tp + fn), "fpr": r(fp, fp + tn), "fnr": r(fn, tp + fn), "tnr": r(tn, fp + tn),
        "precision": r(tp, tp + fp), "fdr": r(fp, tp + fp), "for": r(fn, tn + fn), "npv": r(tn, tn + fn),
        "ppr": r(tp + fp, len(rows)), "prevalence": r(tp + fn, len(rows)),
    }


audit_rows = st.integers(1, 200).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.sampled_from("ABCD"), min_size=n, max_size=n),
    )
)


def test_binarize_is_inclusive():
    assert binarize([0.2, 0.5, 0.9], 0.5).tolist() == [0, 1, 1]
    assert binarize([0.0, 0.3], 0.0).tolist() == [1, 1]
    assert binarize([0.5, 0.99], 1.0).tolist() == [0, 0]


def test_group_confusion_worked_example(eight_rows):
    counts = group_confusion(binarize(eight_rows["scores"], 0.5), eight_rows["labels"], eight_rows["groups"])
    a, b = counts["A"], counts["B"]
    assert (a.tp, a.fn, a.fp, a.tn) == (1, 1, 1, 1)
    assert (b.tp, b.fn, b.fp, b.tn) == (1, 0, 1, 2)


def test_group_metrics_worked_example(eight_rows):
    d = binarize(eight_rows["scores"], 0.5)
    a, b = group_metrics(group_confusion(d, eight_rows["labels"], eight_rows["groups"]))
    assert (a.tpr, a.fpr, a.ppr) == (0.5, 0.5, 0.5)
    assert (b.tpr, b.fpr, b.ppr) == (1.0, 1 / 3, 0.5)


def test_fpr_disparity_worked_example(eight_rows):
    d = binarize(eight_rows["scores"], 0.5)
    m = group_metrics(group_confusion(d, eight_rows["labels"], eight_rows["groups"]))
    report = disparities(m, "fpr", "A", 0.8)
    assert report.disparity["B"] == (1 / 3) / (1 / 2)
    assert report.disparity["A"] == 1.0 and report.fair["A"]
    assert not report.fair["B"]
    assert fairness_score(m, "fpr", "A") == pytest.approx(2 / 3, abs=1e-15)


def test_undefined_rates_are_none():
    m = group_metrics(group_confusion([1, 0, 1], [0, 0, 1], ["A", "A", "B"]))
    assert m[0].tpr is None and m[0].fnr is None
    assert m[1].fpr is None
    report = disparities(m, "tpr", "B")
    assert report.disparity["A"] is None and report.fair["A"] is False
    assert fairness_score(m, "tpr", "B") == 0.0


def test_zero_reference_warns_and_reports_infinity():
    m = group_metrics(group_confusion([0, 0, 1, 0], [0, 0, 0, 0], ["A", "A", "B", "B"]))
    with pytest.warns(ZeroReferenceMetric):
        report = disparities(m, "fpr", "A")
    assert math.isinf(report.disparity["B"]) and not report.fair["B"]
    assert report.to_dict()["per_group"]["B"] == {"disparity": None, "fair": False, "infinite": True}
    assert fairness_score(m, "fpr", "A") == 0.0


def test_both_zero_is_parity():
    m = group_metrics(group_confusion([0, 0, 0, 0], [0, 0, 0, 0], ["A", "A", "B", "B"]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert disparities(m, "fpr", "A").disparity["B"] == 1.0


def test_reference_policies():
    m = group_metrics(group_confusion([1, 0, 1, 1, 0], [0, 0, 0, 0, 0], ["A", "A", "B", "B", "B"]))
    assert ReferencePolicy().resolve(m, "fpr") == "B"  # largest
    assert ReferencePolicy("min_metric").resolve(m, "fpr") == "A"
    tie = group_metrics(group_confusion([1, 0, 1, 1], [0, 0, 0, 0], ["B", "B", "A", "A"]))
    assert ReferencePolicy().resolve(tie, "fpr") == "A"  # tie broken by symbol order
    with pytest.raises(UnknownGroup):
        disparities(m, "fpr", "Z")
    with pytest.raises(UnknownMetric):
        disparities(m, "auc", "A")


def test_fairness_score_reciprocal_form():
    m = group_metrics(group_confusion([1, 1, 1, 0], [0, 0, 0, 0], ["A", "A", "B", "B"]))
    # fpr A = 1, fpr B = 0.5
    assert fairness_score(m, "fpr", "B") == 0.5
    assert fairness_score(m, "fpr", "A") == 0.5


def test_performance_worked_example(eight_rows):
    perf = performance(binarize(eight_rows["scores"], 0.5), eight_rows["labels"])
    assert perf.accuracy == 5 / 8
    assert perf.precision == 2 / 4 and perf.recall == 2 / 3


def test_performance_perfect():
    perf = performance([1, 0, 1, 0], [1, 0, 1, 0])
    assert perf.accuracy == 1.0 and perf.f1 == 1.0


def test_tpr_at_zero_budget_is_above_all_negatives():
    scores = [0.1, 0.4, 0.35, 0.8, 0.7, 0.45]
    labels = [0, 0, 1, 1, 1, 0]
    tpr, thr = tpr_at_fpr(scores, labels, 0.0)
    assert thr > max(s for s, y in zip(scores, labels) if y == 0)
    assert tpr == sum(1 for s, y in zip(scores, labels) if y == 1 and s >= thr) / 3
    assert tpr == 2 / 3


def brute_tpr_at_fpr(scores, labels, budget):
    best = 0.0
    for t in sorted(set(scores)) + [math.inf]:
        fp = sum(1 for s, y in zip(scores, labels) if y == 0 and s >= t)
        if fp / labels.count(0) <= budget:
            best = max(best, sum(1 for s, y in zip(scores, labels) if y == 1 and s >= t) / labels.count(1))
    return best


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 20), st.integers(0, 1)), min_size=2, max_size=60),
    st.floats(0.0, 1.0),
)
def test_tpr_at_fpr_matches_brute_force(rows, budget):
    scores = [s / 20 for s, _ in rows]
    labels = [y for _, y in rows]
    if 0 not in labels or 1 not in labels:
        return
    assert tpr_at_fpr(scores, labels, budget)[0] == brute_tpr_at_fpr(scores, labels, budget)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 1)), min_size=2, max_size=60), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_tpr_at_fpr_monotone_in_budget(rows, b1, b2):
    scores = [s / 20 for s, _ in rows]
    labels = [y for _, y in rows]
    if 0 not in labels or 1 not in labels:
        return
    lo, hi = sorted((b1, b2))
    assert tpr_at_fpr(scores, labels, lo)[0] <= tpr_at_fpr(scores, labels, hi)[0]


@settings(max_examples=150, deadline=None)
@given(audit_rows)
def test_group_metrics_match_naive_recount(rows):
    decisions, labels, groups = rows
    for gm in group_metrics(group_confusion(decisions, labels, groups)):
        expected = naive_rates(decisions, labels, groups, gm.group)
        assert gm.to_dict()["metrics"] == expected
        assert gm.counts.total == groups.count(gm.group)
        if gm.tpr is not None:
            assert Fraction(gm.counts.tp, gm.counts.tp + gm.counts.fn) + Fraction(gm.counts.fn, gm.counts.tp + gm.counts.fn) == 1


@pytest.mark.filterwarnings("ignore::fairflow.errors.ZeroReferenceMetric")
@settings(max_examples=60, deadline=None)
@given(audit_rows, st.randoms(use_true_random=False))
def test_permuting_rows_changes_nothing(rows, rnd):
    decisions, labels, groups = rows
    order = list(range(len(labels)))
    rnd.shuffle(order)
    a = Audit(decisions, labels, groups).to_dict()
    b = Audit([decisions[i] for i in order], [labels[i] for i in order], [groups[i] for i in order]).to_dict()
    assert a == b


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.floats(0, 1), st.floats(0, 1))
def test_binarize_monotone(scores, t1, t2):
    lo, hi = sorted((t1, t2))
    assert np.all(binarize(scores, hi) <= binarize(scores, lo))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 30), st.integers(0, 30))
def test_fairness_score_swap_symmetry(neg_a, neg_b, fp_a, fp_b):
    fp_a, fp_b = min(fp_a, neg_a), min(fp_b, neg_b)

    def rows(fp_first):
        fa, fb = (fp_a, fp_b) if fp_first else (fp_b, fp_a)
        na, nb = (neg_a, neg_b) if fp_first else (neg_b, neg_a)
        d = [1] * fa + [0] * (na - fa) + [1] * fb + [0] * (nb - fb)
        return d, [0] * len(d), ["A"] * na + ["B"] * nb

    m1 = group_metrics(group_confusion(*rows(True)))
    m2 = group_metrics(group_confusion(*rows(False)))
    assert fairness_score(m1, "fpr", "A") == fairness_score(m2, "fpr", "A")


def test_audit_json_shape(eight_rows):
    doc = Audit(**eight_rows, reference="A").to_dict()
    assert set(doc) == {"groups", "disparities", "fairness_score", "performance"}
    assert doc["disparities"]["per_group"]["B"]["disparity"] == pytest.approx(2 / 3)
    assert doc["groups"][0]["counts"] == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}
