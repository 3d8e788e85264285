"""Standardized method interfaces and the method registry.

Every method family shares the same construction contract::

    method = Kind(params={...}, seed=123)

``params`` is validated against the class's ``PARAMS`` declarations and
missing entries take their declared defaults. Calling a prediction-side
method before ``fit`` raises :class:`NotFitted`; refitting replaces all
learned state.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Any, ClassVar, Mapping

import numpy as np

from ..errors import InvalidSpace, NotFitted, UnknownKind
from .space import HyperparameterSpace, ParamSpace

FAMILIES = ("preprocessing", "estimator", "postprocessing")


@dataclass(frozen=True)
class Param:
    """Declared domain and default of one method hyperparameter."""

    type: str  # int | float | categorical
    default: Any
    low: float | None = None
    high: float | None = None
    low_inclusive: bool = True
    choices: tuple[Any, ...] | None = None
    doc: str = ""

    def check(self, value: Any) -> str | None:
        if self.type == "categorical":
            return None if value in (self.choices or ()) else f"must be one of {list(self.choices or ())}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return "must be a number"
        if self.type == "int" and int(value) != value:
            return "must be an integer"
        if self.low is not None:
            if value < self.low or (value == self.low and not self.low_inclusive):
                return f"must be {'>=' if self.low_inclusive else '>'} {self.low}"
        if self.high is not None and value > self.high:
            return f"must be <= {self.high}"
        return None

    def check_space(self, dim: ParamSpace) -> str | None:
        if self.type == "categorical" and dim.type != "categorical":
            return "categorical parameter needs a categorical space"
        if self.type == "int" and dim.type not in ("int", "categorical"):
            return "integer parameter needs an int or categorical space"
        candidates = list(dim.choices or ()) if dim.type == "categorical" else [dim.low, dim.high]
        candidates += list(dim.grid or ())
        for v in candidates:
            problem = self.check(v)
            if problem:
                return f"value {v!r} {problem}"
        return None


class Method(abc.ABC):
    kind: ClassVar[str]
    family: ClassVar[str]
    PARAMS: ClassVar[dict[str, Param]] = {}

    def __init__(self, params: Mapping[str, Any] | None = None, seed: int = 0):
        params = dict(params or {})
        unknown = sorted(set(params) - set(self.PARAMS))
        if unknown:
            raise InvalidSpace(f"{self.kind}: unknown parameters {unknown}")
        resolved = {}
        for name, decl in self.PARAMS.items():
            value = params.get(name, decl.default)
            problem = decl.check(value)
            if problem:
                raise InvalidSpace(f"{self.kind}.{name} {problem}")
            resolved[name] = int(value) if decl.type == "int" else value
        self.params = resolved
        self.seed = int(seed)
        self._fitted = False

    def _require_fit(self) -> None:
        if not self._fitted:
            raise NotFitted(f"{type(self).__name__} must be fitted first")

    @abc.abstractmethod
    def learned_state(self) -> dict[str, Any]:
        """JSON-able fitted state, enough to predict without refitting."""

    @abc.abstractmethod
    def load_state(self, state: Mapping[str, Any]) -> None: ...

    def to_dict(self) -> dict[str, Any]:
        self._require_fit()
        return {"kind": self.kind, "hyperparams": dict(self.params), "learned": self.learned_state(), "seed": self.seed}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> Method:
        obj = get_method(cls.family, payload["kind"])(payload.get("hyperparams"), payload.get("seed", 0))
        obj.load_state(payload["learned"])
        obj._fitted = True
        return obj


class PreProcessor(Method):
    """Modifies training data; returns (X', y', s', sample_weights')."""

    family = "preprocessing"

    @abc.abstractmethod
    def fit(self, X: np.ndarray, y: np.ndarray, s: np.ndarray) -> PreProcessor: ...

    @abc.abstractmethod
    def transform(
        self, X: np.ndarray, y: np.ndarray, s: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]: ...

    def fit_transform(self, X, y, s):
        return self.fit(X, y, s).transform(X, y, s)


class Estimator(Method):
    """Base estimators and in-processing methods: scores in [0, 1]."""

    family = "estimator"

    @abc.abstractmethod
    def fit(self, X: np.ndarray, y: np.ndarray, s: np.ndarray, sample_weight: np.ndarray | None = None) -> Estimator: ...

    @abc.abstractmethod
    def predict_scores(self, X: np.ndarray, s: np.ndarray | None = None) -> np.ndarray: ...

    def predict_proba(self, X: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
        return self.predict_scores(X, s)


class PostProcessor(Method):
    """Adjusts scores after training. Thresholding methods return 0/1 decisions."""

    family = "postprocessing"

    @abc.abstractmethod
    def fit(self, scores: np.ndarray, y: np.ndarray, s: np.ndarray) -> PostProcessor: ...

    @abc.abstractmethod
    def adjust(self, scores: np.ndarray, s: np.ndarray) -> np.ndarray: ...


_REGISTRY: dict[str, dict[str, type[Method]]] = {f: {} for f in FAMILIES}


def register(cls: type[Method]) -> type[Method]:
    _REGISTRY[cls.family][cls.kind] = cls
    return cls


def get_method(family: str, kind: str) -> type[Method]:
    try:
        return _REGISTRY[family][kind]
    except KeyError:
        known = sorted(_REGISTRY.get(family, {}))
        raise UnknownKind(f"unknown {family} kind {kind!r}; registered: {known}") from None


def registered(family: str | None = None) -> dict[str, dict[str, type[Method]]]:
    families = FAMILIES if family is None else (family,)
    return {f: dict(sorted(_REGISTRY[f].items())) for f in families}


def validate_space(cls: type[Method], space: HyperparameterSpace) -> list[tuple[str, str]]:
    """Problems as ``(param_name, message)`` pairs; empty when the space is valid."""
    problems = []
    for name, dim in space.items():
        decl = cls.PARAMS.get(name)
        if decl is None:
            problems.append((name, f"{cls.kind} has no parameter {name!r} (declared: {sorted(cls.PARAMS)})"))
            continue
        msg = decl.check_space(dim)
        if msg:
            problems.append((name, msg))
    return problems
