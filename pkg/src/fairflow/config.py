"""Experiment configuration files (``fairflow-config/1``).

Configs are a YAML subset: scalars, mappings and sequences only. Anchors,
aliases and explicit tags are rejected. Parsing validates structure against
the JSON Schema shipped in ``fairflow/schemas`` and then checks semantics
(registered kinds, parameter domains, unique names). The parsed
:class:`ExperimentConfig` has every default filled in, and
``ExperimentConfig.to_dict()`` re-parses to an equal object.

A config with no ``methods`` section expands to the default baseline
suite (see :func:`default_experiment`).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema
import yaml

from .audit import ReferencePolicy
from .data import ColumnSpec, SplitSpec, validate_schema
from .errors import ConfigError, DataError, DuplicateName, FairflowError, SchemaError, UnknownKind
from .hyperopt import EvalSpec, OptimizerConfig
from .methods.base import get_method, validate_space
from .methods.pipeline import ComponentSpec, PipelineSpec
from .methods.space import HyperparameterSpace, ParamSpace

SCHEMA_VERSION = "fairflow-config/1"
DEFAULT_SEED = 42


# -- YAML subset -----------------------------------------------------------------


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads ``1e-4`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def load_yaml_subset(text: str) -> Any:
    for token in yaml.scan(text, Loader=_Loader):
        if isinstance(token, (yaml.AnchorToken, yaml.AliasToken, yaml.TagToken)):
            line = token.start_mark.line + 1
            raise SchemaError([("", f"line {line}: anchors, aliases and tags are not supported")])
    return yaml.load(text, Loader=_Loader)


class _Dumper(yaml.SafeDumper):
    def ignore_aliases(self, data: Any) -> bool:  # shared objects are written out in full
        return True


def dump_yaml(payload: Any) -> str:
    return yaml.dump(payload, Dumper=_Dumper, sort_keys=False, default_flow_style=False)


# -- config model ----------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int = 2000
    group_fractions: tuple[float, ...] = (0.5, 0.5)
    base_rates: tuple[float, ...] = (0.5, 0.5)
    separation: float | tuple[float, ...] = 2.0
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        sep = list(self.separation) if isinstance(self.separation, tuple) else self.separation
        return {
            "n_rows": self.n_rows,
            "group_fractions": list(self.group_fractions),
            "base_rates": list(self.base_rates),
            "separation": sep,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    source: str  # "synthetic" or a CSV/Parquet path
    split: SplitSpec = field(default_factory=SplitSpec)
    schema: tuple[ColumnSpec, ...] | None = None
    synthetic: SyntheticSpec | None = None
    include_sensitive: bool = False

    @property
    def is_synthetic(self) -> bool:
        return self.source == "synthetic"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "source": self.source}
        if self.is_synthetic:
            out["synthetic"] = (self.synthetic or SyntheticSpec()).to_dict()
        else:
            out["schema"] = [c.to_dict() for c in self.schema or ()]
        out["split"] = self.split.to_dict()
        out["include_sensitive"] = self.include_sensitive
        return out


@dataclass(frozen=True)
class MethodSpec:
    name: str
    pipeline: PipelineSpec

    def to_dict(self) -> dict[str, Any]:
        p = self.pipeline
        return {
            "name": self.name,
            "preprocessing": p.preprocessing.to_dict() if p.preprocessing else None,
            "estimator": p.estimator.to_dict(),
            "postprocessing": p.postprocessing.to_dict() if p.postprocessing else None,
        }


@dataclass(frozen=True)
class OptimizationSpec:
    n_trials: int = 50
    sampler: str = "random"
    n_jobs: int = 1

    def optimizer(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(self.n_trials, self.sampler, seed, self.n_jobs)  # type: ignore[arg-type]


@dataclass(frozen=True)
class AnalysisSpec:
    n_bootstrap: int = 1000
    ci_level: float = 0.95


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    global_seed: int
    datasets: tuple[DatasetSpec, ...]
    methods: tuple[MethodSpec, ...]
    optimization: OptimizationSpec = field(default_factory=OptimizationSpec)
    evaluation: EvalSpec = field(default_factory=EvalSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        ev = self.evaluation
        return {
            "schema": SCHEMA_VERSION,
            "experiment_id": self.experiment_id,
            "global_seed": self.global_seed,
            "datasets": [d.to_dict() for d in self.datasets],
            "methods": [m.to_dict() for m in self.methods],
            "optimization": {
                "n_trials": self.optimization.n_trials,
                "sampler": self.optimization.sampler,
                "n_jobs": self.optimization.n_jobs,
            },
            "evaluation": {
                "performance_metric": ev.performance_metric,
                "fairness_metric": ev.fairness_metric,
                "reference": ev.reference.to_config(),
                "tau": ev.tau,
                "fpr_budget": ev.fpr_budget,
                "alpha": ev.alpha,
                "threshold": ev.threshold,
            },
            "analysis": {"n_bootstrap": self.analysis.n_bootstrap, "ci_level": self.analysis.ci_level},
        }

    def dataset(self, name: str) -> DatasetSpec:
        return next(d for d in self.datasets if d.name == name)

    def method(self, name: str) -> MethodSpec:
        return next(m for m in self.methods if m.name == name)

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(self, global_seed=int(seed))

    def resolve_source(self, dataset: DatasetSpec) -> Path:
        path = Path(dataset.source)
        return path if path.is_absolute() else self.base_dir / path


# -- default suite ---------------------------------------------------------------

_LOGREG_SPACE = {
    "learning_rate": {"type": "logfloat", "low": 0.01, "high": 1.0},
    "l2_penalty": {"type": "logfloat", "low": 1e-4, "high": 0.1},
}
_FAIR_LOGREG_SPACE = {
    "learning_rate": {"type": "logfloat", "low": 0.01, "high": 0.2},
    "l2_penalty": {"type": "logfloat", "low": 1e-4, "high": 0.1},
    "fairness_lambda": {"type": "logfloat", "low": 0.1, "high": 10.0},
}
_THRESHOLD_SPACE = {
    "strategy": {"type": "categorical", "choices": ["demographic_parity", "tpr_parity"]},
    "target_rate": {"type": "float", "low": 0.2, "high": 0.8},
}

DEFAULT_METHODS: list[dict[str, Any]] = [
    {"name": "logreg", "estimator": {"kind": "logreg", "space": _LOGREG_SPACE}},
    {
        "name": "reweighing_logreg",
        "preprocessing": {"kind": "reweighing", "space": {}},
        "estimator": {"kind": "logreg", "space": _LOGREG_SPACE},
    },
    {"name": "fair_logreg", "estimator": {"kind": "fair_logreg", "space": _FAIR_LOGREG_SPACE}},
    {
        "name": "logreg_group_threshold",
        "estimator": {"kind": "logreg", "space": _LOGREG_SPACE},
        "postprocessing": {"kind": "group_threshold", "space": _THRESHOLD_SPACE},
    },
]
DEFAULT_N_TRIALS = 50


def default_experiment(dataset: DatasetSpec | Mapping[str, Any], experiment_id: str = "default") -> ExperimentConfig:
    """Baseline suite for a single dataset: plain, reweighed, penalized and thresholded logreg.

    50 random trials per method with global seed 42.
    """
    ds = dataset.to_dict() if isinstance(dataset, DatasetSpec) else dict(dataset)
    raw = {
        "experiment_id": experiment_id,
        "global_seed": DEFAULT_SEED,
        "datasets": [ds],
        "methods": DEFAULT_METHODS,
        "optimization": {"n_trials": DEFAULT_N_TRIALS, "sampler": "random", "n_jobs": 1},
    }
    return config_from_mapping(raw)


# -- parsing ---------------------------------------------------------------------


def _schema() -> dict[str, Any]:
    text = resources.files("fairflow").joinpath("schemas/fairflow-config-1.schema.json").read_text("utf-8")
    return json.loads(text)


def _path(parts: Sequence[Any]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _normalise(raw: Any) -> Any:
    """Stringify split-map keys (YAML reads ``2021:`` as an int)."""
    if isinstance(raw, dict):
        for ds in raw.get("datasets") or []:
            split = ds.get("split") if isinstance(ds, dict) else None
            if isinstance(split, dict) and isinstance(split.get("mapping"), dict):
                split["mapping"] = {
                    (str(int(k)) if isinstance(k, float) and k.is_integer() else str(k)): v
                    for k, v in split["mapping"].items()
                }
    return raw


def _structural_errors(raw: Any) -> list[tuple[str, str]]:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = []
    for err in sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        errors.append((_path(err.absolute_path), err.message))
    return errors


def _component(raw: Mapping[str, Any], family: str, where: str, errors: list[tuple[str, str]]) -> ComponentSpec | None:
    try:
        cls = get_method(family, raw["kind"])
    except UnknownKind as exc:
        errors.append((f"{where}.kind", str(exc)))
        return None
    dims = {}
    for name, dim in (raw.get("space") or {}).items():
        try:
            dims[name] = ParamSpace.from_dict(dim)
        except FairflowError as exc:
            suffix = f".{exc.field}" if getattr(exc, "field", None) else ""
            errors.append((f"{where}.space.{name}{suffix}", str(exc)))
    space = HyperparameterSpace(dims)
    for name, msg in validate_space(cls, space):
        errors.append((f"{where}.space.{name}", msg))
    return ComponentSpec(raw["kind"], space)


def _dataset(raw: Mapping[str, Any], where: str, errors: list[tuple[str, str]]) -> DatasetSpec | None:
    split_raw = dict(raw.get("split") or {"method": "random"})
    try:
        if split_raw.get("method", "random") == "random":
            split = SplitSpec(
                "random",
                tuple(split_raw.get("proportions", (0.6, 0.2, 0.2))),  # type: ignore[arg-type]
                int(split_raw.get("seed", 0)),
            )
        else:
            split = SplitSpec("column", None, 0, split_raw.get("column"), split_raw.get("mapping"))
    except DataError as exc:
        errors.append((f"{where}.split", str(exc)))
        return None
    include = bool(raw.get("include_sensitive", False))
    if raw["source"] == "synthetic":
        if "schema" in raw:
            errors.append((f"{where}.schema", "synthetic datasets have a fixed schema"))
        syn = dict(raw.get("synthetic") or {})
        sep = syn.get("separation", 2.0)
        spec = SyntheticSpec(
            n_rows=int(syn.get("n_rows", 2000)),
            group_fractions=tuple(syn.get("group_fractions", (0.5, 0.5))),
            base_rates=tuple(syn.get("base_rates", (0.5, 0.5))),
            separation=tuple(float(v) for v in sep) if isinstance(sep, list) else float(sep),
            seed=int(syn.get("seed", 0)),
        )
        if len(spec.base_rates) != len(spec.group_fractions):
            errors.append((f"{where}.synthetic.base_rates", "needs one base rate per group"))
        if abs(sum(spec.group_fractions) - 1.0) > 1e-9:
            errors.append((f"{where}.synthetic.group_fractions", "must sum to 1"))
        if split.method == "column":
            errors.append((f"{where}.split.method", "synthetic datasets only support random splits"))
        return DatasetSpec(raw["name"], "synthetic", split, None, spec, include)
    if "synthetic" in raw:
        errors.append((f"{where}.synthetic", "only valid with source: synthetic"))
    if "schema" not in raw:
        errors.append((f"{where}.schema", "file datasets need a column schema"))
        return None
    try:
        schema = validate_schema([ColumnSpec(c["name"], c["kind"]) for c in raw["schema"]])
    except DataError as exc:
        errors.append((f"{where}.schema", str(exc)))
        return None
    if split.method == "column" and split.column not in {c.name for c in schema}:
        errors.append((f"{where}.split.column", f"{split.column!r} is not a schema column"))
    return DatasetSpec(raw["name"], str(raw["source"]), split, schema, None, include)


def _check_unique(items: Sequence[Mapping[str, Any]], where: str) -> None:
    seen: set[str] = set()
    for i, item in enumerate(items):
        name = item.get("name")
        if name in seen:
            raise DuplicateName([(f"{where}[{i}].name", f"duplicate name {name!r}")])
        seen.add(name)


def config_from_mapping(raw: Any, base_dir: Path | str = ".") -> ExperimentConfig:
    """Validate an already-parsed document and build the config object."""
    raw = _normalise(raw)
    if not isinstance(raw, dict):
        raise SchemaError([("", "config must be a mapping")])
    structural = _structural_errors(raw)
    if structural:
        raise SchemaError(structural)
    _check_unique(raw["datasets"], "datasets")
    if "methods" not in raw:
        defaults = default_experiment(raw["datasets"][0])
        raw = {
            **defaults.to_dict(),
            **{k: v for k, v in raw.items() if k not in ("methods",)},
        }
        raw.setdefault("optimization", defaults.to_dict()["optimization"])
    _check_unique(raw["methods"], "methods")

    errors: list[tuple[str, str]] = []
    datasets = [_dataset(d, f"datasets[{i}]", errors) for i, d in enumerate(raw["datasets"])]
    methods = []
    kind_errors: list[tuple[str, str]] = []
    for i, m in enumerate(raw["methods"]):
        comps: dict[str, ComponentSpec | None] = {}
        for family in ("preprocessing", "estimator", "postprocessing"):
            if m.get(family) is None:
                comps[family] = None
                continue
            before = len(errors)
            comps[family] = _component(m[family], family, f"methods[{i}].{family}", errors)
            kind_errors += [e for e in errors[before:] if e[0].endswith(".kind")]
        if comps["estimator"] is not None:
            methods.append(MethodSpec(m["name"], PipelineSpec(comps["estimator"], comps["preprocessing"], comps["postprocessing"])))

    opt = raw.get("optimization") or {}
    optimization = OptimizationSpec(int(opt.get("n_trials", 50)), opt.get("sampler", "random"), int(opt.get("n_jobs", 1)))
    if optimization.sampler == "grid":
        for i, m in enumerate(methods):
            ranged = [n for n, d in m.pipeline.search_space().items() if not d.is_finite]
            if ranged:
                errors.append((f"methods[{i}]", f"grid sampler needs finite dimensions; ranged without grid: {ranged}"))

    ev = raw.get("evaluation") or {}
    try:
        evaluation = EvalSpec(
            performance_metric=ev.get("performance_metric", "accuracy"),
            fairness_metric=ev.get("fairness_metric", "fpr"),
            reference=ReferencePolicy.parse(ev.get("reference", "largest")),
            tau=float(ev.get("tau", 0.8)),
            fpr_budget=None if ev.get("fpr_budget") is None else float(ev["fpr_budget"]),
            alpha=float(ev.get("alpha", 0.5)),
            threshold=float(ev.get("threshold", 0.5)),
        )
    except (ValueError, FairflowError) as exc:
        errors.append(("evaluation", str(exc)))
        evaluation = EvalSpec()

    an = raw.get("analysis") or {}
    analysis = AnalysisSpec(int(an.get("n_bootstrap", 1000)), float(an.get("ci_level", 0.95)))

    if kind_errors and len(kind_errors) == len(errors):
        raise UnknownKind(kind_errors)
    if errors:
        raise SchemaError(errors)
    return ExperimentConfig(
        experiment_id=raw.get("experiment_id", "experiment"),
        global_seed=int(raw.get("global_seed", DEFAULT_SEED)),
        datasets=tuple(d for d in datasets if d is not None),
        methods=tuple(methods),
        optimization=optimization,
        evaluation=evaluation,
        analysis=analysis,
        base_dir=Path(base_dir),
    )


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read, validate and default-fill a config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([("", f"cannot read {path}: {exc.strerror or exc}")]) from exc
    try:
        raw = load_yaml_subset(text)
    except yaml.YAMLError as exc:
        raise SchemaError([("", f"invalid YAML: {exc}")]) from exc
    return config_from_mapping(raw, base_dir=path.parent)


def write_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_yaml(config.to_dict()), encoding="utf-8")
