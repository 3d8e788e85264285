"""Post-processing: group-specific decision thresholds."""

from __future__ import annotations

import math
from typing import Any, Mapping

import numpy as np

from ..errors import EmptyGroupAtFit, MethodError, NoPositivesInGroup
from .base import Param, PostProcessor, register

STRATEGIES = ("demographic_parity", "tpr_parity")


def quantile_threshold(scores: np.ndarray, target_rate: float) -> float:
    """Threshold selecting (about) ``target_rate`` of ``scores`` under ``score >= t``.

    With scores sorted ascending the threshold is ``sorted[n - k]`` where
    ``k = floor(target_rate * n)``, clamped to a valid index. Without ties
    exactly ``max(k, 1)`` rows pass, so the realized rate is within ``1/n``.
    """
    ordered = np.sort(np.asarray(scores, dtype=np.float64))
    n = len(ordered)
    if n == 0:
        raise EmptyGroupAtFit("cannot place a threshold on an empty score set")
    k = math.floor(target_rate * n + 1e-9)
    idx = min(max(n - k, 0), n - 1)
    return float(ordered[idx])


def group_threshold_fit(
    scores: np.ndarray,
    labels: np.ndarray,
    groups: np.ndarray,
    strategy: str = "demographic_parity",
    target_rate: float = 0.5,
) -> dict[str, float]:
    """Per-group thresholds.

    ``demographic_parity`` targets each group's predicted-positive rate;
    ``tpr_parity`` places the threshold on the group's positive-label scores
    so that its TPR is about ``target_rate``.
    """
    if strategy not in STRATEGIES:
        raise MethodError(f"unknown strategy {strategy!r}")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    groups = np.asarray([str(g) for g in groups], dtype=object)
    if len(scores) == 0:
        raise EmptyGroupAtFit("no rows to fit thresholds on")
    thresholds = {}
    for g in sorted(set(groups.tolist())):
        mask = groups == g
        pool = scores[mask]
        if strategy == "tpr_parity":
            pool = scores[mask & (labels == 1)]
            if len(pool) == 0:
                raise NoPositivesInGroup(f"group {g!r} has no positive labels")
        thresholds[g] = quantile_threshold(pool, target_rate)
    return thresholds


@register
class GroupThreshold(PostProcessor):
    """Per-group thresholds; ``adjust`` returns 0/1 decisions, not scores.

    Groups unseen at fit time fall back to a pooled threshold fitted on all
    rows with the same strategy.
    """

    kind = "group_threshold"
    PARAMS = {
        "strategy": Param("categorical", "demographic_parity", choices=STRATEGIES),
        "target_rate": Param("float", 0.5, low=0.0, high=1.0),
    }

    def fit(self, scores, y, s):
        strategy, rate = self.params["strategy"], self.params["target_rate"]
        self.thresholds_ = group_threshold_fit(scores, y, s, strategy, rate)
        pooled = np.asarray(scores, dtype=np.float64)
        if strategy == "tpr_parity":
            pooled = pooled[np.asarray(y).astype(np.int64) == 1]
        self.pooled_threshold_ = quantile_threshold(pooled, rate)
        self._fitted = True
        return self

    def adjust(self, scores, s):
        self._require_fit()
        scores = np.asarray(scores, dtype=np.float64)
        thr = np.array([self.thresholds_.get(str(g), self.pooled_threshold_) for g in s], dtype=np.float64)
        return (scores >= thr).astype(np.int64)

    def learned_state(self) -> dict[str, Any]:
        return {"thresholds": dict(self.thresholds_), "pooled_threshold": self.pooled_threshold_}

    def load_state(self, state: Mapping[str, Any]) -> None:
        self.thresholds_ = {str(k): float(v) for k, v in state["thresholds"].items()}
        self.pooled_threshold_ = float(state["pooled_threshold"])
