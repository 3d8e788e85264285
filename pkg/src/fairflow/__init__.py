"""fairflow: reproducible fair-ML experiments on tabular data.

Load or synthesize a dataset, search hyperparameters for several bias
mitigation pipelines, audit every trial for group fairness, and compare the
results through Pareto frontiers and bootstrap intervals.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .audit import Audit, disparities, fairness_score, group_confusion, group_metrics, performance
from .config import ExperimentConfig, default_experiment, parse_config
from .data import ColumnSpec, Dataset, SplitSpec, create_splits, generate_synthetic, load_csv, load_parquet
from .errors import FairflowError
from .experiment import Experiment, ResultStore, compare_stores, run_experiment

__all__ = [
    "Audit",
    "ColumnSpec",
    "Dataset",
    "Experiment",
    "ExperimentConfig",
    "FairflowError",
    "ResultStore",
    "SplitSpec",
    "__version__",
    "compare_stores",
    "create_splits",
    "default_experiment",
    "disparities",
    "fairness_score",
    "generate_synthetic",
    "group_confusion",
    "group_metrics",
    "load_csv",
    "load_parquet",
    "parse_config",
    "performance",
    "run_experiment",
]
