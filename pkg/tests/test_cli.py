from __future__ import annotations

import json
from pathlib import Path

import pytest

from fairflow.cli import main
from fairflow.config import DEFAULT_METHODS, dump_yaml
from fairflow.data import load_csv

from conftest import EIGHT_ROWS, small_config_dict
from svgcheck import find_all, validate_svg

EXAMPLE = Path(__file__).resolve().parents[1] / "src" / "fairflow" / "configs" / "example.yaml"


@pytest.fixture(scope="module")
def example_store(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    assert main(["run", "--config", str(EXAMPLE), "--out", str(out)]) == 0
    return out / "example"


def write_small(tmp_path, **kwargs):
    path = tmp_path / "small.yaml"
    path.write_text(dump_yaml(small_config_dict(**kwargs)))
    return path


def test_run_example_writes_store_and_plots(example_store):
    assert (example_store / "manifest.json").exists()
    assert (example_store / "COMPLETE").exists()
    analysis = json.loads((example_store / "analysis.json").read_text())
    assert set(analysis["datasets"]["synthetic"]) >= {"frontier", "best", "methods"}
    for name in ("model_selection.svg", "method_comparison.svg"):
        validate_svg((example_store / "plots" / "synthetic" / name).read_text())


def test_plot_regenerates_identical_bytes(example_store, tmp_path):
    for kind, name in (("a", "model_selection.svg"), ("b", "method_comparison.svg")):
        out = tmp_path / f"{kind}.svg"
        assert main(["plot", "--store", str(example_store), "--kind", kind, "--out", str(out)]) == 0
        assert out.read_bytes() == (example_store / "plots" / "synthetic" / name).read_bytes()
    root = validate_svg((tmp_path / "b.svg").read_text())
    assert len(find_all(root, "circle", "estimate")) == 4


def test_run_summary_table(tmp_path, capsys):
    cfg = write_small(tmp_path, n_trials=2, methods=DEFAULT_METHODS[:2])
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "res")]) == 0
    out = capsys.readouterr().out
    assert "best trade-off:" in out and "reweighing_logreg" in out


def test_existing_store_is_runtime_error(tmp_path, capsys):
    cfg = write_small(tmp_path, n_trials=2, methods=DEFAULT_METHODS[:1])
    args = ["run", "--config", str(cfg), "--out", str(tmp_path / "res")]
    assert main(args) == 0
    assert main(args) == 3
    assert "StoreExists" in capsys.readouterr().err
    assert main(args + ["--force"]) == 0


def test_seed_precedence(tmp_path, monkeypatch):
    cfg = write_small(tmp_path, n_trials=2, methods=DEFAULT_METHODS[:1], seed=42)
    out = tmp_path / "res"

    def seed_used():
        return json.loads((out / "small" / "manifest.json").read_text())["config"]["global_seed"]

    monkeypatch.delenv("FAIRFLOW_SEED", raising=False)
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert seed_used() == 42
    monkeypatch.setenv("FAIRFLOW_SEED", "7")
    assert main(["run", "--config", str(cfg), "--out", str(out), "--force"]) == 0
    assert seed_used() == 7
    assert main(["run", "--config", str(cfg), "--out", str(out), "--force", "--seed", "9"]) == 0
    assert seed_used() == 9
    monkeypatch.setenv("FAIRFLOW_SEED", "abc")
    assert main(["run", "--config", str(cfg), "--out", str(out), "--force"]) == 2


def test_validate_config(tmp_path, capsys):
    assert main(["validate-config", "--config", str(EXAMPLE)]) == 0
    assert capsys.readouterr().out.strip() == "valid"
    bad = tmp_path / "bad.yaml"
    bad.write_text(EXAMPLE.read_text().replace("tau: 0.8", "tau: 1.5"))
    assert main(["validate-config", "--config", str(bad)]) == 2
    assert "evaluation.tau" in capsys.readouterr().err


def test_audit_eight_rows(tmp_path, capsys):
    path = tmp_path / "scores.csv"
    rows = zip(EIGHT_ROWS["scores"], EIGHT_ROWS["labels"], EIGHT_ROWS["groups"])
    path.write_text("score,label,group\n" + "".join(f"{s},{y},{g}\n" for s, y, g in rows))
    out = tmp_path / "audit.json"
    assert main(["audit", "--scores", str(path), "--labels-column", "label", "--group-column", "group", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert any(line.split() == ["B", "0.6667", "no"] for line in printed.splitlines())
    doc = json.loads(out.read_text())
    assert doc["disparities"]["per_group"]["B"]["disparity"] == pytest.approx(2 / 3)
    assert doc["performance"]["accuracy"] == 0.625


def test_audit_rejects_non_binary_label(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("score,label,group\n0.5,2,A\n")
    assert main(["audit", "--scores", str(path)]) == 3


def test_generate_synthetic(tmp_path):
    out = tmp_path / "syn.csv"
    assert main(["generate-synthetic", "--rows", "120", "--groups", "3", "--base-rates", "0.8,0.5,0.2", "--seed", "4", "--out", str(out)]) == 0
    from fairflow.data import ColumnSpec

    data = load_csv(out, [ColumnSpec("x1", "numeric"), ColumnSpec("x2", "numeric"), ColumnSpec("group", "sensitive_group"), ColumnSpec("label", "binary_label")])
    assert data.n_rows == 120 and sorted(data.group_levels) == ["A", "B", "C"]
    assert main(["generate-synthetic", "--rows", "120", "--groups", "3", "--base-rates", "0.8,0.2", "--out", str(out)]) == 2


def test_list_methods(capsys):
    assert main(["list-methods"]) == 0
    out = capsys.readouterr().out
    for kind in ("reweighing", "logreg", "fair_logreg", "group_threshold"):
        assert kind in out


def test_unknown_flags_are_errors():
    assert main(["list-methods", "--frobnicate"]) == 2
    assert main(["nope"]) == 2
