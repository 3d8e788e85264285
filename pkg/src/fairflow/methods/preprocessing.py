"""Pre-processing methods: reweighing and prevalence sampling."""

from __future__ import annotations

import warnings
from collections import Counter
from typing import Any, Mapping

import numpy as np

from ..rng import Xoshiro256StarStar
from .base import PreProcessor, register


def reweighing_weights(y: np.ndarray, s: np.ndarray) -> dict[tuple[str, int], float]:
    """weight(g, y) = n_g * n_y / (n * n_{g,y}) for every observed cell.

    Under these weights each group's weighted prevalence equals the global
    prevalence and the total weight equals n.
    """
    y = np.asarray(y).astype(np.int64)
    groups = [str(g) for g in s]
    n = len(groups)
    n_g = Counter(groups)
    n_y = Counter(y.tolist())
    n_gy = Counter(zip(groups, y.tolist()))
    return {(g, lab): (n_g[g] * n_y[lab]) / (n * count) for (g, lab), count in sorted(n_gy.items())}


@register
class Reweighing(PreProcessor):
    kind = "reweighing"

    def fit(self, X, y, s):
        self.weights_ = reweighing_weights(y, s)
        self.unseen_cells_: list[tuple[str, int]] = []
        self._fitted = True
        return self

    def transform(self, X, y, s):
        self._require_fit()
        y = np.asarray(y).astype(np.int64)
        w = np.empty(len(y))
        for i, (g, lab) in enumerate(zip(s, y.tolist())):
            key = (str(g), lab)
            weight = self.weights_.get(key)
            if weight is None:
                if key not in self.unseen_cells_:
                    self.unseen_cells_.append(key)
                    warnings.warn(f"reweighing: cell {key} unseen at fit time, using weight 1.0", stacklevel=2)
                weight = 1.0
            w[i] = weight
        return X, y, np.asarray(s), w

    def learned_state(self) -> dict[str, Any]:
        return {"weight_table": [{"group": g, "label": lab, "weight": w} for (g, lab), w in self.weights_.items()]}

    def load_state(self, state: Mapping[str, Any]) -> None:
        self.weights_ = {(e["group"], int(e["label"])): float(e["weight"]) for e in state["weight_table"]}
        self.unseen_cells_ = []


def prevalence_sample_index(y: np.ndarray, s: np.ndarray, seed: int, target: float | None = None) -> np.ndarray:
    """Row indices kept after undersampling each group to the target prevalence.

    In a group above the target, positives are dropped down to
    ``round(target * neg / (1 - target))``; below it, negatives are dropped to
    ``round(pos * (1 - target) / target)``. Which rows go is chosen by a
    seeded shuffle per group (groups in symbol order). The result is sorted,
    so surviving rows keep their original relative order.
    """
    y = np.asarray(y).astype(np.int64)
    groups = np.asarray([str(g) for g in s], dtype=object)
    if target is None:
        target = float(np.mean(y))
    keep = np.ones(len(y), dtype=bool)
    if target <= 0.0 or target >= 1.0:
        return np.flatnonzero(keep)
    rng = Xoshiro256StarStar(seed)
    for g in sorted(set(groups.tolist())):
        members = np.flatnonzero(groups == g)
        pos = members[y[members] == 1]
        neg = members[y[members] == 0]
        if len(pos) * (1 - target) > target * len(neg):
            n_keep, pool = int(round(target * len(neg) / (1 - target))), pos
        else:
            n_keep, pool = int(round(len(pos) * (1 - target) / target)), neg
        n_keep = min(n_keep, len(pool))
        if n_keep == len(pool):
            continue
        order = rng.permutation(len(pool))
        keep[pool[order[n_keep:]]] = False
    return np.flatnonzero(keep)


@register
class PrevalenceSampling(PreProcessor):
    kind = "prevalence_sampling"

    def fit(self, X, y, s):
        self.target_ = float(np.mean(np.asarray(y, dtype=np.float64)))
        self._fitted = True
        return self

    def transform(self, X, y, s):
        self._require_fit()
        idx = prevalence_sample_index(y, s, self.seed, self.target_)
        y = np.asarray(y).astype(np.int64)
        return np.asarray(X)[idx], y[idx], np.asarray(s)[idx], np.ones(len(idx))

    def learned_state(self) -> dict[str, Any]:
        return {"target_prevalence": self.target_}

    def load_state(self, state: Mapping[str, Any]) -> None:
        self.target_ = float(state["target_prevalence"])
