"""Experiment orchestration and the on-disk result store.

Store layout under ``<out_root>/<experiment_id>/``::

    manifest.json                               config echo, hash, cell index
    <dataset>/<method>/trial_<k>.json           one TrialRecord per trial
    <dataset>/<method>/artifacts/trial_<k>.model.json
    COMPLETE                                    written last, on full success
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from . import __version__
from .config import ExperimentConfig, config_from_mapping, parse_config
from .data import Dataset, SplitDataset, create_splits, generate_synthetic, load_table
from .errors import DataError, DatasetLoadError, StoreExists
from .hyperopt import TrialRecord, run_search
from .rng import derive_seed

log = logging.getLogger(__name__)

STORE_VERSION = 1
MANIFEST = "manifest.json"
COMPLETE_MARKER = "COMPLETE"


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(config_dict: dict[str, Any]) -> str:
    return hashlib.sha256(canonical_json(config_dict).encode("utf-8")).hexdigest()


def optimizer_seed(global_seed: int, dataset: str, method: str) -> int:
    """Per-cell seed; depends only on the cell's own names, not on list positions."""
    return derive_seed(global_seed, dataset, method)


def _write_json(path: Path, payload: Any, sort_keys: bool = True) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=sort_keys) + "\n", encoding="utf-8")


def load_dataset(config: ExperimentConfig, name: str) -> Dataset:
    spec = config.dataset(name)
    try:
        if spec.is_synthetic:
            syn = spec.synthetic
            assert syn is not None
            return generate_synthetic(syn.n_rows, syn.group_fractions, syn.base_rates, syn.separation, syn.seed)
        return load_table(config.resolve_source(spec), spec.schema or ())
    except (DataError, OSError) as exc:
        raise DatasetLoadError(f"dataset {name!r}: {exc}") from exc


def split_dataset(config: ExperimentConfig, name: str, data: Dataset) -> SplitDataset:
    spec = config.dataset(name)
    try:
        return create_splits(data, spec.split, include_sensitive=spec.include_sensitive)
    except DataError as exc:
        raise DatasetLoadError(f"dataset {name!r}: {exc}") from exc


@dataclass
class Cell:
    dataset: str
    method: str
    optimizer_seed: int
    trials: list[str]
    n_completed: int
    n_failed: int

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


class ResultStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def manifest(self) -> dict[str, Any]:
        return json.loads((self.root / MANIFEST).read_text(encoding="utf-8"))

    @property
    def config(self) -> ExperimentConfig:
        return config_from_mapping(self.manifest["config"])

    @property
    def is_complete(self) -> bool:
        return (self.root / COMPLETE_MARKER).exists()

    def cells(self) -> list[Cell]:
        return [Cell(**c) for c in self.manifest["cells"]]

    def datasets(self) -> list[str]:
        return list(dict.fromkeys(c.dataset for c in self.cells()))

    def methods(self, dataset: str | None = None) -> list[str]:
        return list(dict.fromkeys(c.method for c in self.cells() if dataset in (None, c.dataset)))

    def trials(self, dataset: str, method: str) -> list[TrialRecord]:
        cell = next(c for c in self.cells() if c.dataset == dataset and c.method == method)
        return [TrialRecord.from_dict(json.loads((self.root / p).read_text("utf-8"))) for p in cell.trials]

    def iter_trials(self, dataset: str | None = None) -> Iterator[tuple[str, str, TrialRecord]]:
        for cell in self.cells():
            if dataset not in (None, cell.dataset):
                continue
            for rec in self.trials(cell.dataset, cell.method):
                yield cell.dataset, cell.method, rec

    def verify(self) -> list[str]:
        """Integrity problems (hash mismatch, missing files); empty when consistent."""
        problems = []
        manifest = self.manifest
        if config_hash(manifest["config"]) != manifest["config_hash"]:
            problems.append("config hash does not match embedded config")
        for cell in self.cells():
            for p in cell.trials:
                if not (self.root / p).exists():
                    problems.append(f"missing trial file {p}")
        return problems


def run_experiment(config: ExperimentConfig, out_root: str | Path, force: bool = False) -> ResultStore:
    """Run every (dataset x method) cell and persist the result store.

    All datasets are loaded and split before any trial runs, so a bad
    source fails fast. The manifest is rewritten after each cell, so
    partial results stay consistent on disk if a later cell crashes.
    """
    root = Path(out_root) / config.experiment_id
    if root.exists():
        if not force:
            raise StoreExists(f"{root} already exists; pass force to overwrite")
        shutil.rmtree(root)

    splits = {}
    for ds in config.datasets:
        splits[ds.name] = split_dataset(config, ds.name, load_dataset(config, ds.name))

    root.mkdir(parents=True)
    cfg = config.to_dict()
    manifest = {
        "store_version": STORE_VERSION,
        "fairflow_version": __version__,
        "schema": cfg["schema"],
        "config": cfg,
        "config_hash": config_hash(cfg),
        "cells": [],
    }
    # no key sorting: search-space declaration order drives the random sampler
    _write_json(root / MANIFEST, manifest, sort_keys=False)

    for ds in config.datasets:
        for method in config.methods:
            seed = optimizer_seed(config.global_seed, ds.name, method.name)
            prefix = f"{ds.name}/{method.name}/"
            log.info("running %s x %s (%d trials)", ds.name, method.name, config.optimization.n_trials)
            records = run_search(
                None,
                method.pipeline,
                splits[ds.name],
                config.optimization.optimizer(seed),
                config.evaluation,
                artifact_root=root,
                artifact_prefix=prefix,
            )
            paths = []
            for rec in records:
                path = f"{prefix}trial_{rec.trial_id}.json"
                _write_json(root / path, rec.to_dict())
                paths.append(path)
            n_failed = sum(not r.ok for r in records)
            cell = Cell(ds.name, method.name, seed, paths, len(records) - n_failed, n_failed)
            manifest["cells"].append(cell.to_dict())
            _write_json(root / MANIFEST, manifest, sort_keys=False)

    (root / COMPLETE_MARKER).write_text("ok\n", encoding="utf-8")
    return ResultStore(root)


def _strip_volatile(payload: Any) -> Any:
    if isinstance(payload, dict):
        return {k: _strip_volatile(v) for k, v in payload.items() if k not in ("duration_ms", "fairflow_version")}
    if isinstance(payload, list):
        return [_strip_volatile(v) for v in payload]
    return payload


def compare_stores(a: str | Path | ResultStore, b: str | Path | ResultStore) -> list[str]:
    """Differences between two stores, ignoring ``duration_ms`` and absolute locations.

    JSON files are compared as parsed documents; other files byte-for-byte.
    Returns an empty list when the stores are equivalent.
    """
    ra = a.root if isinstance(a, ResultStore) else Path(a)
    rb = b.root if isinstance(b, ResultStore) else Path(b)
    files_a = {p.relative_to(ra).as_posix() for p in ra.rglob("*") if p.is_file()}
    files_b = {p.relative_to(rb).as_posix() for p in rb.rglob("*") if p.is_file()}
    diffs = [f"only in first: {p}" for p in sorted(files_a - files_b)]
    diffs += [f"only in second: {p}" for p in sorted(files_b - files_a)]
    for rel in sorted(files_a & files_b):
        pa, pb = ra / rel, rb / rel
        if rel.endswith(".json"):
            same = _strip_volatile(json.loads(pa.read_text("utf-8"))) == _strip_volatile(json.loads(pb.read_text("utf-8")))
        else:
            same = pa.read_bytes() == pb.read_bytes()
        if not same:
            diffs.append(f"differs: {rel}")
    return diffs


class Experiment:
    """Config-driven experiment.

    >>> exp = Experiment(config_file="configs/example.yaml")   # doctest: +SKIP
    >>> store = exp.run()                                       # doctest: +SKIP
    """

    def __init__(
        self,
        config_file: str | Path | None = None,
        *,
        config: ExperimentConfig | None = None,
        out_root: str | Path = "results",
        force: bool = False,
    ):
        if (config_file is None) == (config is None):
            raise ValueError("pass exactly one of config_file or config")
        self.config = parse_config(config_file) if config is None else config
        self.out_root = Path(out_root)
        self.force = force
        self.store: ResultStore | None = None

    def run(self) -> ResultStore:
        self.store = run_experiment(self.config, self.out_root, self.force)
        return self.store

    def _require_store(self) -> ResultStore:
        if self.store is None:
            raise RuntimeError("run() the experiment first")
        return self.store

    def model_selection(self, dataset: str | None = None, alpha: float | None = None):
        from .analysis import model_selection

        store = self._require_store()
        alpha = self.config.evaluation.alpha if alpha is None else alpha
        return model_selection(store, dataset or store.datasets()[0], alpha)

    def compare_methods(self, dataset: str | None = None, **kwargs: Any):
        from .analysis import compare_methods

        store = self._require_store()
        return compare_methods(store, dataset=dataset, **kwargs)
