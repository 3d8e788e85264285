"""Seeded hyperparameter search over a method pipeline.

The whole trial plan is drawn before any training starts, and every trial
gets its own seed ``derive_seed(optimizer_seed, trial_id)``. Trial results
therefore do not depend on worker count or scheduling.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from .audit import (
    PERFORMANCE_METRICS,
    RATE_FIELDS,
    ReferencePolicy,
    binarize,
    disparities,
    fairness_score,
    group_confusion,
    group_metrics,
    performance,
)
from .data import SplitDataset
from .errors import GridTooSmall, InfiniteGrid, UnknownMetric, ZeroReferenceMetric
from .methods.pipeline import PipelineSpec
from .methods.space import HyperparameterSpace, sample_hyperparams
from .rng import Xoshiro256StarStar, derive_seed

log = logging.getLogger(__name__)
GROUP_METRIC_NAMES = tuple("for" if f == "for_" else f for f in RATE_FIELDS)


@dataclass(frozen=True)
class OptimizerConfig:
    n_trials: int = 50
    sampler: Literal["random", "grid"] = "random"
    seed: int = 42
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")
        if self.sampler not in ("random", "grid"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass(frozen=True)
class EvalSpec:
    performance_metric: str = "accuracy"
    fairness_metric: str = "fpr"
    reference: ReferencePolicy = field(default_factory=ReferencePolicy)
    tau: float = 0.8
    fpr_budget: float | None = None
    alpha: float = 0.5
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.performance_metric not in PERFORMANCE_METRICS:
            raise UnknownMetric(f"unknown performance metric {self.performance_metric!r}")
        if self.fairness_metric not in GROUP_METRIC_NAMES:
            raise UnknownMetric(f"unknown fairness metric {self.fairness_metric!r}")
        if self.performance_metric == "tpr_at_fpr" and self.fpr_budget is None:
            raise ValueError("tpr_at_fpr needs an fpr_budget")


@dataclass
class TrialRecord:
    trial_id: int
    params: dict[str, Any]
    seed: int
    validation: dict[str, Any] | None = None
    test: dict[str, Any] | None = None
    fairness: dict[str, Any] | None = None
    error: dict[str, str] | None = None
    artifact_path: str | None = None
    duration_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "trial_id": self.trial_id,
            "params": self.params,
            "seed": self.seed,
            "validation": self.validation,
            "test": self.test,
            "fairness": self.fairness,
            "artifact_path": self.artifact_path,
            "duration_ms": self.duration_ms,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> TrialRecord:
        return cls(
            trial_id=payload["trial_id"],
            params=payload["params"],
            seed=payload["seed"],
            validation=payload.get("validation"),
            test=payload.get("test"),
            fairness=payload.get("fairness"),
            error=payload.get("error"),
            artifact_path=payload.get("artifact_path"),
            duration_ms=payload.get("duration_ms", 0.0),
        )


def plan_trials(space: HyperparameterSpace, config: OptimizerConfig) -> list[dict[str, Any]]:
    """Ordered parameter assignments, one per trial.

    Random: ``n_trials`` draws from xoshiro256** seeded with ``config.seed``.
    Grid: Cartesian product in declaration order (first parameter varies
    slowest), truncated to ``n_trials``.
    """
    if config.sampler == "random":
        rng = Xoshiro256StarStar(config.seed)
        return [sample_hyperparams(space, rng) for _ in range(config.n_trials)]
    infinite = [name for name, dim in space.items() if not dim.is_finite]
    if infinite:
        raise InfiniteGrid(f"grid sampler needs finite choices; ranged without grid: {infinite}")
    names = list(space)
    product = list(itertools.product(*(space[n].values() for n in names)))
    if config.n_trials > len(product):
        raise GridTooSmall(f"n_trials={config.n_trials} exceeds grid cardinality {len(product)}")
    return [dict(zip(names, combo)) for combo in product[: config.n_trials]]


def trial_seed(optimizer_seed: int, trial_id: int) -> int:
    return derive_seed(optimizer_seed, trial_id)


def evaluate(values, labels, groups, eval_spec: EvalSpec) -> tuple[dict[str, Any], dict[str, Any]]:
    """Summary metrics and the full fairness audit for one partition."""
    perf = performance(values, labels, eval_spec.fpr_budget, eval_spec.threshold)
    decisions = binarize(values, eval_spec.threshold)
    metrics = group_metrics(group_confusion(decisions, labels, groups))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroReferenceMetric)  # recorded as zero_reference in the report
        report = disparities(metrics, eval_spec.fairness_metric, eval_spec.reference, eval_spec.tau)
    fscore = fairness_score(metrics, eval_spec.fairness_metric, eval_spec.reference)
    summary = perf.to_dict()
    summary["performance"] = perf.get(eval_spec.performance_metric)
    summary["fairness_score"] = fscore
    audit = {"groups": [m.to_dict() for m in metrics], "disparities": report.to_dict()}
    return summary, audit


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_trial(
    trial_id: int,
    assignment: dict[str, Any],
    pipeline_spec: PipelineSpec,
    split_data: SplitDataset,
    eval_spec: EvalSpec,
    seed: int,
    artifact_root: Path | None = None,
    artifact_path: str | None = None,
) -> TrialRecord:
    """Fit on train (post-processor on validation), score validation and test.

    Any exception inside the method becomes an ``error`` record so the
    search can continue.
    """
    record = TrialRecord(trial_id=trial_id, params=dict(assignment), seed=seed)
    start = time.perf_counter()
    try:
        pipeline = pipeline_spec.build(assignment, seed)
        pipeline.fit(split_data.train, split_data.validation)
        fairness = {}
        for name in ("validation", "test"):
            part = split_data.partition(name)
            summary, audit = evaluate(pipeline.predict(part).values, part.y, part.s, eval_spec)
            setattr(record, name, summary)
            fairness[name] = audit
        record.fairness = fairness
        if artifact_root is not None and artifact_path is not None:
            artifact = {"encoder": split_data.encoder.to_dict(), "trial_id": trial_id, **pipeline.to_dict()}
            artifact["seeds"]["trial"] = seed
            _write_json(artifact_root / artifact_path, artifact)
            record.artifact_path = artifact_path
    except Exception as exc:  # noqa: BLE001 - a failed trial must not abort the search
        log.warning("trial %d failed: %s: %s", trial_id, type(exc).__name__, exc)
        record.validation = record.test = record.fairness = None
        record.error = {"type": type(exc).__name__, "message": str(exc)}
    record.duration_ms = round((time.perf_counter() - start) * 1000.0, 3)
    return record


def run_search(
    space: HyperparameterSpace | None,
    pipeline_spec: PipelineSpec,
    split_data: SplitDataset,
    config: OptimizerConfig,
    eval_spec: EvalSpec,
    artifact_root: Path | None = None,
    artifact_prefix: str = "",
) -> list[TrialRecord]:
    """Run every planned trial, on ``config.n_jobs`` threads; results ordered by trial_id."""
    space = pipeline_spec.search_space() if space is None else space
    pipeline_spec.validate()
    plan = plan_trials(space, config)
    # materialise encoded partitions once, before workers share them
    for name in ("train", "validation", "test"):
        split_data.partition(name)

    results: dict[int, TrialRecord] = {}
    lock = threading.Lock()

    def work(trial_id: int) -> None:
        path = f"{artifact_prefix}artifacts/trial_{trial_id}.model.json" if artifact_root is not None else None
        rec = run_trial(
            trial_id,
            plan[trial_id],
            pipeline_spec,
            split_data,
            eval_spec,
            trial_seed(config.seed, trial_id),
            artifact_root,
            path,
        )
        with lock:
            results[trial_id] = rec

    if config.n_jobs == 1:
        for i in range(len(plan)):
            work(i)
    else:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            list(pool.map(work, range(len(plan))))
    return [results[i] for i in range(len(plan))]
