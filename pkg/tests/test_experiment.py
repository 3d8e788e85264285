from __future__ import annotations

import json

import pytest

from fairflow.config import DEFAULT_METHODS, config_from_mapping
from fairflow.errors import DatasetLoadError, StoreExists
from fairflow.experiment import Experiment, ResultStore, compare_stores, config_hash, optimizer_seed, run_experiment
from fairflow.rng import derive_seed

from conftest import small_config_dict

TWO_METHODS = DEFAULT_METHODS[:2]


def test_store_layout_counts(tmp_path, small_config):
    cfg = small_config(n_trials=5, methods=TWO_METHODS)
    store = run_experiment(cfg, tmp_path)
    root = tmp_path / "small"
    trials = sorted(p.relative_to(root).as_posix() for p in root.glob("*/*/trial_*.json"))
    assert len(trials) == 10
    assert (root / "manifest.json").exists() and store.is_complete
    assert len(list(root.glob("*/*/artifacts/trial_*.model.json"))) == 10
    assert store.verify() == []
    assert store.methods() == ["logreg", "reweighing_logreg"]


def test_rerun_is_deterministic(tmp_path, small_config):
    cfg = small_config(n_trials=3)
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg, tmp_path / "b")
    assert compare_stores(a, b) == []
    # duration fields really do differ between runs; the comparison ignores them
    ra = json.loads((a.root / "syn/logreg/trial_0.json").read_text())
    assert "duration_ms" in ra


def test_compare_stores_detects_changes(tmp_path, small_config):
    a = run_experiment(small_config(n_trials=2, methods=TWO_METHODS), tmp_path / "a")
    b = run_experiment(small_config(n_trials=2, methods=TWO_METHODS, seed=43), tmp_path / "b")
    assert compare_stores(a, b)


def test_refuses_overwrite_without_force(tmp_path, small_config):
    cfg = small_config(n_trials=1, methods=TWO_METHODS[:1])
    run_experiment(cfg, tmp_path)
    with pytest.raises(StoreExists):
        run_experiment(cfg, tmp_path)
    assert run_experiment(cfg, tmp_path, force=True).is_complete


def test_unreadable_dataset_fails_before_any_trial(tmp_path):
    raw = small_config_dict(n_trials=1)
    raw["datasets"].append(
        {
            "name": "missing",
            "source": str(tmp_path / "nope.csv"),
            "schema": [{"name": "x", "kind": "numeric"}, {"name": "g", "kind": "sensitive_group"}, {"name": "y", "kind": "binary_label"}],
        }
    )
    with pytest.raises(DatasetLoadError):
        run_experiment(config_from_mapping(raw), tmp_path / "out")
    assert not (tmp_path / "out" / "small").exists()


def test_manifest_config_echo_round_trips(tmp_path, small_config):
    cfg = small_config(n_trials=1, methods=TWO_METHODS)
    store = run_experiment(cfg, tmp_path)
    manifest = store.manifest
    assert store.config == cfg
    assert manifest["config_hash"] == config_hash(cfg.to_dict())


def test_adding_a_method_leaves_others_unchanged(tmp_path, small_config):
    one = run_experiment(small_config(n_trials=3, methods=DEFAULT_METHODS[:1]), tmp_path / "one")
    two = run_experiment(small_config(n_trials=3, methods=[DEFAULT_METHODS[2], DEFAULT_METHODS[0]]), tmp_path / "two")
    strip = lambda recs: [{k: v for k, v in r.to_dict().items() if k != "duration_ms"} for r in recs]  # noqa: E731
    assert strip(one.trials("syn", "logreg")) == strip(two.trials("syn", "logreg"))


def test_optimizer_seed_uses_names():
    assert optimizer_seed(42, "syn", "logreg") == derive_seed(42, "syn", "logreg")


def test_verify_reports_tampering(tmp_path, small_config):
    store = run_experiment(small_config(n_trials=1, methods=TWO_METHODS[:1]), tmp_path)
    (store.root / "syn/logreg/trial_0.json").unlink()
    manifest = json.loads((store.root / "manifest.json").read_text())
    manifest["config"]["global_seed"] = 7
    (store.root / "manifest.json").write_text(json.dumps(manifest))
    problems = ResultStore(store.root).verify()
    assert len(problems) == 2


def test_experiment_facade(tmp_path, small_config):
    exp = Experiment(config=small_config(n_trials=3, methods=TWO_METHODS), out_root=tmp_path)
    with pytest.raises(RuntimeError):
        exp.model_selection()
    exp.run()
    sel = exp.model_selection()
    assert sel.best in sel.frontier
    summaries = exp.compare_methods(n_bootstrap=50)
    assert {s.method for s in summaries} == {"logreg", "reweighing_logreg"}
    with pytest.raises(ValueError):
        Experiment()
