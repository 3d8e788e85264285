"""Post-experiment analysis: Pareto frontiers, best trade-off, method comparison.

The combined score of a trial is ``alpha * performance + (1 - alpha) * fairness``.
Method comparison bootstraps over *trials* (hyperparameter-search
variability), not over test rows.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Sequence

import numpy as np

from .errors import TooFewTrials
from .rng import Xoshiro256StarStar, derive_seed

if TYPE_CHECKING:
    from .experiment import ResultStore


@dataclass(frozen=True, order=True)
class TrialRef:
    dataset: str
    method: str
    trial_id: int

    def __str__(self) -> str:
        return f"{self.dataset}/{self.method}/trial_{self.trial_id}"


@dataclass(frozen=True)
class TradeoffPoint:
    performance: float
    fairness: float
    trial_ref: TrialRef

    def combined(self, alpha: float) -> float:
        return alpha * self.performance + (1.0 - alpha) * self.fairness

    def to_dict(self) -> dict[str, Any]:
        return {"performance": self.performance, "fairness": self.fairness, "trial_ref": asdict(self.trial_ref)}


def dominates(q: TradeoffPoint, p: TradeoffPoint) -> bool:
    return (
        q.performance >= p.performance
        and q.fairness >= p.fairness
        and (q.performance > p.performance or q.fairness > p.fairness)
    )


def pareto_frontier(points: Sequence[TradeoffPoint]) -> list[TradeoffPoint]:
    """Non-dominated points, sorted by performance descending.

    Sweep in order of decreasing performance: within a block of equal
    performance only the block's highest fairness can survive, and only if it
    beats every strictly better-performing point. Exact duplicates survive
    together.
    """
    ordered = sorted(points, key=lambda p: (-p.performance, -p.fairness, p.trial_ref))
    frontier: list[TradeoffPoint] = []
    best_fair = -np.inf
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].performance == ordered[i].performance:
            j += 1
        top = ordered[i].fairness
        if top > best_fair:
            frontier.extend(p for p in ordered[i:j] if p.fairness == top)
            best_fair = top
        i = j
    return frontier


def best_tradeoff(points: Sequence[TradeoffPoint], alpha: float) -> TradeoffPoint:
    """Maximize the combined score.

    Ties go to higher fairness, then higher performance, then the lower
    trial reference, which keeps the winner on the Pareto frontier even at
    ``alpha`` of 0 or 1.
    """
    if not points:
        raise ValueError("no points to choose from")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return min(points, key=lambda p: (-p.combined(alpha), -p.fairness, -p.performance, p.trial_ref))


def tradeoff_points(store: ResultStore, dataset: str, partition: str = "validation") -> tuple[list[TradeoffPoint], int]:
    """Points for completed trials with both coordinates defined, plus the excluded count."""
    points, excluded = [], 0
    for ds, method, rec in store.iter_trials(dataset):
        metrics = getattr(rec, partition)
        if not rec.ok or metrics is None or metrics.get("performance") is None or metrics.get("fairness_score") is None:
            excluded += 1
            continue
        points.append(TradeoffPoint(float(metrics["performance"]), float(metrics["fairness_score"]), TrialRef(ds, method, rec.trial_id)))
    return points, excluded


@dataclass
class ModelSelection:
    dataset: str
    alpha: float
    points: list[TradeoffPoint]
    frontier: list[TradeoffPoint]
    best: TradeoffPoint
    excluded: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "alpha": self.alpha,
            "points": [p.to_dict() for p in self.points],
            "frontier": [p.to_dict() for p in self.frontier],
            "best": {**self.best.to_dict(), "combined": self.best.combined(self.alpha)},
            "coverage": {"included": len(self.points), "excluded": self.excluded},
        }


def model_selection(store: ResultStore, dataset: str, alpha: float = 0.5) -> ModelSelection:
    """Frontier and best trade-off from validation metrics (test is never used to select)."""
    points, excluded = tradeoff_points(store, dataset, "validation")
    if not points:
        raise TooFewTrials(f"no completed trials with defined metrics for dataset {dataset!r}")
    return ModelSelection(dataset, alpha, points, pareto_frontier(points), best_tradeoff(points, alpha), excluded)


# -- bootstrap -------------------------------------------------------------------


def exact_mean(values: Sequence[float]) -> float:
    """Mean computed in exact rational arithmetic, rounded once."""
    return float(sum(map(Fraction, values), Fraction(0)) / len(values))


def bootstrap_means(values: Sequence[float], n_bootstrap: int, seed: int) -> np.ndarray:
    """Means of ``n_bootstrap`` with-replacement resamples of size ``len(values)``."""
    n = len(values)
    exact = [Fraction(v) for v in values]
    rng = Xoshiro256StarStar(seed)
    out = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        out[b] = float(sum((exact[rng.below(n)] for _ in range(n)), Fraction(0)) / n)
    return out


def percentile_interval(means: np.ndarray, ci_level: float) -> tuple[float, float]:
    """Percentile interval at ``(1 - ci_level)/2`` and ``(1 + ci_level)/2`` (linear interpolation)."""
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    lo, hi = np.quantile(means, [(1.0 - ci_level) / 2.0, (1.0 + ci_level) / 2.0])
    return float(lo), float(hi)


@dataclass(frozen=True)
class MethodSummary:
    method: str
    point_estimate: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_bootstrap: int
    dataset: str = ""
    ci_level: float = 0.95
    n_excluded: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def summarize_scores(
    method: str, scores: Sequence[float], n_bootstrap: int, ci_level: float, seed: int, dataset: str = "", n_excluded: int = 0
) -> MethodSummary:
    if len(scores) < 2:
        raise TooFewTrials(f"method {method!r} has {len(scores)} usable trials; need at least 2")
    point = exact_mean(scores)
    lo, hi = percentile_interval(bootstrap_means(scores, n_bootstrap, seed), ci_level)
    # the interval always brackets the point estimate
    return MethodSummary(method, point, min(lo, point), max(hi, point), len(scores), n_bootstrap, dataset, ci_level, n_excluded)


def compare_methods(
    store: ResultStore,
    alpha: float | None = None,
    n_bootstrap: int | None = None,
    ci_level: float | None = None,
    seed: int | None = None,
    dataset: str | None = None,
) -> list[MethodSummary]:
    """Bootstrap CIs of the combined test-set score per method, best first.

    Unset arguments come from the store's config; the default seed is
    ``derive_seed(global_seed, "analysis")`` and each method resamples with
    ``derive_seed(seed, dataset, method)``.
    """
    cfg = store.config
    alpha = cfg.evaluation.alpha if alpha is None else alpha
    n_bootstrap = cfg.analysis.n_bootstrap if n_bootstrap is None else n_bootstrap
    ci_level = cfg.analysis.ci_level if ci_level is None else ci_level
    seed = derive_seed(cfg.global_seed, "analysis") if seed is None else seed
    dataset = store.datasets()[0] if dataset is None else dataset
    summaries = []
    for method in store.methods(dataset):
        scores, excluded = [], 0
        for rec in store.trials(dataset, method):
            t = rec.test
            if not rec.ok or t is None or t.get("performance") is None or t.get("fairness_score") is None:
                excluded += 1
                continue
            scores.append(alpha * t["performance"] + (1.0 - alpha) * t["fairness_score"])
        summaries.append(
            summarize_scores(method, scores, n_bootstrap, ci_level, derive_seed(seed, dataset, method), dataset, excluded)
        )
    return sorted(summaries, key=lambda s: (-s.point_estimate, s.method))


def analysis_report(store: ResultStore, dataset: str, alpha: float | None = None, **kwargs: Any) -> dict[str, Any]:
    """JSON-able ``{frontier, best, methods, ...}`` document consumed by the renderer and CLI."""
    alpha = store.config.evaluation.alpha if alpha is None else alpha
    selection = model_selection(store, dataset, alpha)
    methods = compare_methods(store, alpha=alpha, dataset=dataset, **kwargs)
    return {**selection.to_dict(), "methods": [m.to_dict() for m in methods]}
