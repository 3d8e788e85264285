from __future__ import annotations

from typing import Any

import pytest

from fairflow.config import DEFAULT_METHODS, config_from_mapping

# The 8-row worked example: group A labels (1,1,0,0) decisions (1,0,1,0),
# group B labels (1,0,0,0) decisions (1,1,0,0).
EIGHT_ROWS = {
    "scores": [0.9, 0.1, 0.9, 0.1, 0.9, 0.9, 0.1, 0.1],
    "labels": [1, 1, 0, 0, 1, 0, 0, 0],
    "groups": ["A", "A", "A", "A", "B", "B", "B", "B"],
}


@pytest.fixture
def eight_rows() -> dict[str, list]:
    return {k: list(v) for k, v in EIGHT_ROWS.items()}


def small_config_dict(
    *, n_trials: int = 4, n_rows: int = 300, seed: int = 42, methods: list[dict[str, Any]] | None = None, **extra: Any
) -> dict[str, Any]:
    raw = {
        "experiment_id": "small",
        "global_seed": seed,
        "datasets": [
            {
                "name": "syn",
                "source": "synthetic",
                "synthetic": {"n_rows": n_rows, "group_fractions": [0.6, 0.4], "base_rates": [0.6, 0.3], "seed": 1},
            }
        ],
        "methods": DEFAULT_METHODS if methods is None else methods,
        "optimization": {"n_trials": n_trials},
    }
    raw.update(extra)
    return raw


@pytest.fixture
def small_config():
    def make(**kwargs: Any):
        return config_from_mapping(small_config_dict(**kwargs))

    return make


# -- acceptance report -----------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
