"""Confusion-matrix group audits, reference-group disparities and performance.

Rates with a zero denominator are *undefined* and represented as ``None``
(``null`` in JSON). They are never coerced to 0, and any disparity touching
an undefined rate is itself undefined and counted as unfair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping, Sequence, Sized

import numpy as np

from .errors import AuditError, UnknownGroup, UnknownMetric, ZeroReferenceMetric

RATE_FIELDS: tuple[str, ...] = (
    "tpr",
    "fpr",
    "fnr",
    "tnr",
    "precision",
    "fdr",
    "for_",
    "npv",
    "ppr",
    "prevalence",
)
DEFAULT_TAU = 0.8


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


@dataclass(frozen=True)
class GroupMetrics:
    group: str
    counts: ConfusionCounts
    tpr: float | None
    fpr: float | None
    fnr: float | None
    tnr: float | None
    precision: float | None
    fdr: float | None
    for_: float | None
    npv: float | None
    ppr: float | None
    prevalence: float | None

    @classmethod
    def from_counts(cls, group: str, c: ConfusionCounts) -> GroupMetrics:
        pos, neg = c.tp + c.fn, c.fp + c.tn
        pred_pos, pred_neg = c.tp + c.fp, c.tn + c.fn
        return cls(
            group=group,
            counts=c,
            tpr=_ratio(c.tp, pos),
            fpr=_ratio(c.fp, neg),
            fnr=_ratio(c.fn, pos),
            tnr=_ratio(c.tn, neg),
            precision=_ratio(c.tp, pred_pos),
            fdr=_ratio(c.fp, pred_pos),
            for_=_ratio(c.fn, pred_neg),
            npv=_ratio(c.tn, pred_neg),
            ppr=_ratio(pred_pos, c.total),
            prevalence=_ratio(pos, c.total),
        )

    def get(self, metric: str) -> float | None:
        return getattr(self, _metric_field(metric))

    def to_dict(self) -> dict[str, Any]:
        return {
            "group": self.group,
            "counts": asdict(self.counts),
            "metrics": {_public_name(f): getattr(self, f) for f in RATE_FIELDS},
        }


def _public_name(field_name: str) -> str:
    return "for" if field_name == "for_" else field_name


def _metric_field(metric: str) -> str:
    name = "for_" if metric == "for" else metric
    if name not in RATE_FIELDS:
        raise UnknownMetric(f"unknown group metric {metric!r}; choose from {[_public_name(f) for f in RATE_FIELDS]}")
    return name


# -- reference policy ------------------------------------------------------------


@dataclass(frozen=True)
class ReferencePolicy:
    """Which group the others are compared against.

    ``largest`` (default): most rows, ties by symbol order.
    ``min_metric``: smallest defined value of the audited metric.
    ``group``: an explicit group symbol.
    """

    kind: str = "largest"
    group: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("largest", "min_metric", "group"):
            raise AuditError(f"unknown reference policy {self.kind!r}")
        if (self.kind == "group") != (self.group is not None):
            raise AuditError("an explicit group is required exactly for the 'group' policy")

    @classmethod
    def parse(cls, value: ReferencePolicy | str | Mapping[str, Any] | None) -> ReferencePolicy:
        if value is None:
            return cls()
        if isinstance(value, ReferencePolicy):
            return value
        if isinstance(value, Mapping):
            return cls("group", str(value["group"]))
        if value in ("largest", "min_metric"):
            return cls(value)
        return cls("group", str(value))

    def to_config(self) -> str | dict[str, str]:
        return {"group": self.group} if self.kind == "group" else self.kind

    def resolve(self, metrics: Sequence[GroupMetrics], metric: str) -> str:
        by_symbol = sorted(metrics, key=lambda m: m.group)
        if self.kind == "group":
            if not any(m.group == self.group for m in metrics):
                raise UnknownGroup(f"reference group {self.group!r} not present in audit")
            return str(self.group)
        if self.kind == "min_metric":
            defined = [m for m in by_symbol if m.get(metric) is not None]
            if defined:
                return min(defined, key=lambda m: m.get(metric)).group  # stable: first symbol wins ties
        return max(by_symbol, key=lambda m: (m.counts.total, -by_symbol.index(m))).group


# -- core operations -------------------------------------------------------------


def binarize(scores: Iterable[float], threshold: float) -> np.ndarray:
    """Decision is 1 iff score >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise AuditError(f"threshold must lie in [0, 1], got {threshold}")
    return (np.asarray(scores, dtype=np.float64) >= threshold).astype(np.int64)


def _check_lengths(*arrays: Sized) -> None:
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise AuditError(f"inputs have unequal lengths {sorted(lengths)}")


def group_confusion(decisions: Iterable[int], labels: Iterable[int], groups: Iterable[Any]) -> dict[str, ConfusionCounts]:
    """Per-group confusion counts, keyed in symbol order."""
    d = np.asarray(decisions).astype(np.int64)
    y = np.asarray(labels).astype(np.int64)
    g = np.asarray([str(v) for v in groups], dtype=object)
    _check_lengths(d, y, g)
    if y.size and not np.all(np.isin(y, (0, 1))):
        raise AuditError("labels must be binary")
    if d.size and not np.all(np.isin(d, (0, 1))):
        raise AuditError("decisions must be binary")
    out: dict[str, ConfusionCounts] = {}
    for group in sorted(set(g.tolist())):
        mask = g == group
        dg, yg = d[mask], y[mask]
        out[group] = ConfusionCounts(
            tp=int(np.sum((dg == 1) & (yg == 1))),
            fp=int(np.sum((dg == 1) & (yg == 0))),
            tn=int(np.sum((dg == 0) & (yg == 0))),
            fn=int(np.sum((dg == 0) & (yg == 1))),
        )
    return out


def group_metrics(counts: Mapping[str, ConfusionCounts]) -> list[GroupMetrics]:
    if not counts:
        raise AuditError("at least one group is required")
    return [GroupMetrics.from_counts(g, counts[g]) for g in sorted(counts)]


@dataclass(frozen=True)
class DisparityReport:
    reference_group: str
    metric: str
    tau: float
    disparity: dict[str, float | None]
    fair: dict[str, bool]
    zero_reference: bool = False

    def to_dict(self) -> dict[str, Any]:
        per_group = {}
        for g, d in self.disparity.items():
            per_group[g] = {"disparity": None if d is None or math.isinf(d) else d, "fair": self.fair[g]}
            if d is not None and math.isinf(d):
                per_group[g]["infinite"] = True
        return {
            "metric": _public_name(_metric_field(self.metric)),
            "reference": self.reference_group,
            "tau": self.tau,
            "zero_reference": self.zero_reference,
            "per_group": per_group,
        }


def _disparity(value: float | None, ref: float | None) -> float | None:
    if value is None or ref is None:
        return None
    if ref == 0.0:
        # both zero is parity; a positive rate against a zero reference is unbounded
        return 1.0 if value == 0.0 else math.inf
    return value / ref


def disparities(
    metrics: Sequence[GroupMetrics],
    metric: str,
    reference: ReferencePolicy | str | None = None,
    tau: float = DEFAULT_TAU,
) -> DisparityReport:
    """Ratio of each group's metric to the reference group's metric.

    A group is fair iff its disparity lies in ``[tau, 1/tau]``.
    """
    if not 0.0 < tau <= 1.0:
        raise AuditError(f"tau must lie in (0, 1], got {tau}")
    _metric_field(metric)
    policy = ReferencePolicy.parse(reference)
    ref_group = policy.resolve(metrics, metric)
    ref_value = next(m for m in metrics if m.group == ref_group).get(metric)
    disp: dict[str, float | None] = {}
    fair: dict[str, bool] = {}
    zero_ref = False
    for m in metrics:
        d = _disparity(m.get(metric), ref_value)
        if d is not None and math.isinf(d):
            zero_ref = True
        disp[m.group] = d
        fair[m.group] = d is not None and tau <= d <= 1.0 / tau
    if zero_ref:
        warnings.warn(
            f"reference group {ref_group!r} has {metric}=0; positive groups get infinite disparity",
            ZeroReferenceMetric,
            stacklevel=2,
        )
    return DisparityReport(ref_group, metric, tau, disp, fair, zero_ref)


def fairness_score(
    metrics: Sequence[GroupMetrics],
    metric: str,
    reference: ReferencePolicy | str | None = None,
) -> float:
    """Worst-case parity in [0, 1]: min over non-reference groups of min(d, 1/d).

    1.0 is perfect parity. Undefined or infinite disparities score 0.
    """
    _metric_field(metric)
    ref_group = ReferencePolicy.parse(reference).resolve(metrics, metric)
    ref = next(m for m in metrics if m.group == ref_group).get(metric)
    score = 1.0
    for m in metrics:
        if m.group == ref_group:
            continue
        v = m.get(metric)
        if v is None or ref is None:
            return 0.0
        if v == 0.0 and ref == 0.0:
            continue
        if v == 0.0 or ref == 0.0:
            return 0.0
        # min(v/ref, ref/v) rather than 1/d keeps the score exactly swap-symmetric
        score = min(score, v / ref, ref / v)
    return score


# -- performance -----------------------------------------------------------------


@dataclass(frozen=True)
class PerformanceMetrics:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None
    tpr_at_fpr: float | None = None
    fpr_budget: float | None = None
    threshold_at_fpr: float | None = None

    def get(self, name: str) -> float | None:
        if name not in PERFORMANCE_METRICS:
            raise UnknownMetric(f"unknown performance metric {name!r}")
        return getattr(self, name)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if out["threshold_at_fpr"] is not None and math.isinf(out["threshold_at_fpr"]):
            out["threshold_at_fpr"] = None
        return out


PERFORMANCE_METRICS: tuple[str, ...] = ("accuracy", "precision", "recall", "f1", "tpr_at_fpr")


def tpr_at_fpr(scores: Sequence[float], labels: Sequence[int], fpr_budget: float) -> tuple[float | None, float]:
    """Best TPR over thresholds at observed scores whose FPR stays within budget.

    FPR only falls as the threshold rises, so this is the smallest candidate
    threshold meeting the budget. ``+inf`` (predict nothing) is always a
    candidate. Returns ``(tpr, threshold)``; tpr is ``None`` with no positives.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    neg = np.sort(s[y == 0])
    pos = np.sort(s[y == 1])
    candidates = np.append(np.unique(s), math.inf)
    if len(neg):
        fpr = (len(neg) - np.searchsorted(neg, candidates, side="left")) / len(neg)
        ok = fpr <= fpr_budget
    else:
        ok = np.ones(len(candidates), dtype=bool)
    threshold = float(candidates[int(np.argmax(ok))])  # last candidate (inf) always qualifies
    if not len(pos):
        return None, threshold
    tpr = (len(pos) - int(np.searchsorted(pos, threshold, side="left"))) / len(pos)
    return tpr, threshold


def performance(
    values: Sequence[float],
    labels: Sequence[int],
    fpr_budget: float | None = None,
    threshold: float = 0.5,
) -> PerformanceMetrics:
    """Global metrics; ``values`` may be scores or 0/1 decisions (binarized at ``threshold``)."""
    v = np.asarray(values, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    _check_lengths(v, y)
    if not len(y):
        raise AuditError("cannot evaluate an empty set")
    d = binarize(v, threshold)
    tp = int(np.sum((d == 1) & (y == 1)))
    fp = int(np.sum((d == 1) & (y == 0)))
    fn = int(np.sum((d == 0) & (y == 1)))
    tn = int(np.sum((d == 0) & (y == 0)))
    tpr_b = thr = None
    if fpr_budget is not None:
        if not 0.0 <= fpr_budget <= 1.0:
            raise AuditError(f"fpr_budget must lie in [0, 1], got {fpr_budget}")
        tpr_b, thr = tpr_at_fpr(v, y, fpr_budget)
    return PerformanceMetrics(
        accuracy=(tp + tn) / len(y),
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        f1=_ratio(2 * tp, 2 * tp + fp + fn),
        tpr_at_fpr=tpr_b,
        fpr_budget=fpr_budget,
        threshold_at_fpr=thr,
    )


# -- convenience facade ----------------------------------------------------------


@dataclass
class Audit:
    """Bundle of scores, labels and groups with the usual audit entry points.

    >>> audit = Audit(scores, labels, groups)      # doctest: +SKIP
    >>> audit.performance(); audit.audit()          # doctest: +SKIP
    """

    scores: Sequence[float]
    labels: Sequence[int]
    groups: Sequence[Any]
    threshold: float = 0.5
    metric: str = "fpr"
    reference: ReferencePolicy | str | None = None
    tau: float = DEFAULT_TAU
    fpr_budget: float | None = None
    _metrics: list[GroupMetrics] | None = field(default=None, init=False, repr=False)

    @property
    def decisions(self) -> np.ndarray:
        return binarize(self.scores, self.threshold)

    def group_metrics(self) -> list[GroupMetrics]:
        if self._metrics is None:
            self._metrics = group_metrics(group_confusion(self.decisions, self.labels, self.groups))
        return self._metrics

    def audit(self) -> DisparityReport:
        return disparities(self.group_metrics(), self.metric, self.reference, self.tau)

    def performance(self) -> PerformanceMetrics:
        return performance(self.scores, self.labels, self.fpr_budget, self.threshold)

    def fairness_score(self) -> float:
        return fairness_score(self.group_metrics(), self.metric, self.reference)

    def to_dict(self) -> dict[str, Any]:
        return {
            "groups": [m.to_dict() for m in self.group_metrics()],
            "disparities": self.audit().to_dict(),
            "fairness_score": self.fairness_score(),
            "performance": self.performance().to_dict(),
        }
