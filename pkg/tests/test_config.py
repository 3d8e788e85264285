from __future__ import annotations

import copy
from pathlib import Path

import pytest

from fairflow.config import (
    config_from_mapping,
    default_experiment,
    dump_yaml,
    load_yaml_subset,
    parse_config,
    write_config,
)
from fairflow.errors import ConfigError, DuplicateName, SchemaError, UnknownKind

from conftest import small_config_dict

EXAMPLE = Path(__file__).resolve().parents[1] / "src" / "fairflow" / "configs" / "example.yaml"

MINIMAL = {
    "experiment_id": "mini",
    "global_seed": 1,
    "datasets": [{"name": "d", "source": "synthetic"}],
    "methods": [{"name": "lr", "estimator": {"kind": "logreg"}}],
}


def error_paths(exc: ConfigError) -> list[str]:
    return [p for p, _ in exc.errors]


def test_minimal_config_gets_defaults():
    cfg = config_from_mapping(MINIMAL)
    assert cfg.evaluation.tau == 0.8 and cfg.evaluation.alpha == 0.5
    assert cfg.optimization.sampler == "random"
    doc = cfg.to_dict()
    assert doc["evaluation"]["tau"] == 0.8 and doc["optimization"]["n_trials"] == 50
    assert doc["datasets"][0]["split"] == {"method": "random", "proportions": [0.6, 0.2, 0.2], "seed": 0}


def test_example_config_parses():
    cfg = parse_config(EXAMPLE)
    assert [m.name for m in cfg.methods] == ["logreg", "reweighing_logreg", "fair_logreg", "logreg_group_threshold"]
    assert cfg.optimization.n_trials == 25 and cfg.global_seed == 42


def test_unknown_kind():
    raw = copy.deepcopy(MINIMAL)
    raw["methods"][0]["estimator"]["kind"] = "xgboost"
    with pytest.raises(UnknownKind) as info:
        config_from_mapping(raw)
    assert error_paths(info.value) == ["methods[0].estimator.kind"]


def test_duplicate_dataset_names():
    raw = copy.deepcopy(MINIMAL)
    raw["datasets"] = [{"name": "a", "source": "synthetic"}, {"name": "a", "source": "synthetic"}]
    with pytest.raises(DuplicateName):
        config_from_mapping(raw)


def test_bad_bound_reports_field_path():
    raw = copy.deepcopy(MINIMAL)
    raw["methods"].append(
        {"name": "lr2", "estimator": {"kind": "logreg", "space": {"learning_rate": {"type": "logfloat", "low": -1, "high": 1}}}}
    )
    with pytest.raises(SchemaError) as info:
        config_from_mapping(raw)
    assert "methods[1].estimator.space.learning_rate.low" in error_paths(info.value)


def test_tau_out_of_range_names_field():
    raw = copy.deepcopy(MINIMAL)
    raw["evaluation"] = {"tau": 1.5}
    with pytest.raises(SchemaError) as info:
        config_from_mapping(raw)
    assert error_paths(info.value) == ["evaluation.tau"]


def test_space_must_match_declared_params():
    raw = copy.deepcopy(MINIMAL)
    raw["methods"][0]["estimator"]["space"] = {"depth": {"type": "int", "low": 1, "high": 3}}
    with pytest.raises(SchemaError) as info:
        config_from_mapping(raw)
    assert error_paths(info.value) == ["methods[0].estimator.space.depth"]


def test_unknown_top_level_key_rejected():
    with pytest.raises(SchemaError):
        config_from_mapping({**MINIMAL, "extras": 1})


def test_yaml_subset_rejects_anchors_and_tags():
    with pytest.raises(SchemaError):
        load_yaml_subset("a: &x 1\nb: *x\n")
    with pytest.raises(SchemaError):
        load_yaml_subset("a: !!python/name:os.system 1\n")
    assert load_yaml_subset("a: 1e-4\n") == {"a": 1e-4}


def test_config_file_round_trip(tmp_path):
    cfg = parse_config(EXAMPLE)
    out = tmp_path / "echo.yaml"
    write_config(cfg, out)
    assert parse_config(out) == cfg
    assert load_yaml_subset(dump_yaml(cfg.to_dict())) == cfg.to_dict()


def test_default_experiment_expands_and_is_idempotent():
    cfg = default_experiment({"name": "d", "source": "synthetic"})
    assert len(cfg.methods) == 4 and cfg.optimization.n_trials == 50 and cfg.global_seed == 42
    assert config_from_mapping(cfg.to_dict()) == cfg


def test_default_experiment_keeps_file_dataset_verbatim():
    ds = {
        "name": "csv",
        "source": "data.csv",
        "schema": [{"name": "x", "kind": "numeric"}, {"name": "g", "kind": "sensitive_group"}, {"name": "y", "kind": "binary_label"}],
        "split": {"method": "random", "proportions": [0.5, 0.25, 0.25], "seed": 3},
        "include_sensitive": False,
    }
    cfg = default_experiment(ds)
    assert cfg.to_dict()["datasets"][0] == ds
    assert len(cfg.methods) == 4


def test_dataset_only_config_uses_default_suite():
    cfg = config_from_mapping({"experiment_id": "x", "datasets": [{"name": "d", "source": "synthetic"}]})
    assert [m.name for m in cfg.methods] == ["logreg", "reweighing_logreg", "fair_logreg", "logreg_group_threshold"]


def test_unreadable_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.yaml")


def test_grid_sampler_needs_finite_spaces():
    with pytest.raises(SchemaError):
        config_from_mapping(small_config_dict(optimization={"n_trials": 2, "sampler": "grid"}))
