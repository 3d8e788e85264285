"""Method pipelines: optional pre-processor -> estimator -> optional post-processor."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..data import Partition
from ..errors import InvalidSpace, NotFitted
from ..rng import derive_seed
from .base import FAMILIES, Estimator, Method, PostProcessor, PreProcessor, get_method, validate_space
from .space import HyperparameterSpace


@dataclass(frozen=True)
class ComponentSpec:
    kind: str
    space: HyperparameterSpace = field(default_factory=HyperparameterSpace)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "space": self.space.to_dict()}


@dataclass(frozen=True)
class PipelineSpec:
    estimator: ComponentSpec
    preprocessing: ComponentSpec | None = None
    postprocessing: ComponentSpec | None = None

    def components(self) -> list[tuple[str, ComponentSpec]]:
        return [(f, getattr(self, f)) for f in FAMILIES if getattr(self, f) is not None]

    def validate(self) -> None:
        for family, comp in self.components():
            problems = validate_space(get_method(family, comp.kind), comp.space)
            if problems:
                raise InvalidSpace("; ".join(f"{family}.{name}: {msg}" for name, msg in problems))

    def search_space(self) -> HyperparameterSpace:
        """Joint space with ``<family>.<param>`` names, pre/estimator/post order."""
        space = HyperparameterSpace()
        for family, comp in self.components():
            space = space.merged(comp.space.prefixed(family))
        return space

    def build(self, assignment: Mapping[str, Any], seed: int) -> MethodPipeline:
        parts: dict[str, Method] = {}
        for family, comp in self.components():
            prefix = family + "."
            params = {k[len(prefix):]: v for k, v in assignment.items() if k.startswith(prefix)}
            cls = get_method(family, comp.kind)
            parts[family] = cls(params, seed=derive_seed(seed, family))
        return MethodPipeline(
            estimator=parts["estimator"],  # type: ignore[arg-type]
            preprocessing=parts.get("preprocessing"),  # type: ignore[arg-type]
            postprocessing=parts.get("postprocessing"),  # type: ignore[arg-type]
        )


@dataclass
class Prediction:
    scores: np.ndarray
    decisions: np.ndarray | None  # set when a post-processor produced hard decisions

    @property
    def values(self) -> np.ndarray:
        """What downstream evaluation consumes: decisions if present, else scores."""
        return self.scores if self.decisions is None else self.decisions


@dataclass
class MethodPipeline:
    estimator: Estimator
    preprocessing: PreProcessor | None = None
    postprocessing: PostProcessor | None = None
    _fitted: bool = field(default=False, repr=False)

    def fit(self, train: Partition, validation: Partition | None = None) -> MethodPipeline:
        """Pre-process and fit on train; fit the post-processor on validation scores."""
        X, y, s, w = train.X, train.y, train.s, None
        if self.preprocessing is not None:
            X, y, s, w = self.preprocessing.fit_transform(X, y, s)
        self.estimator.fit(X, y, s, w)
        if self.postprocessing is not None:
            calib = validation if validation is not None else train
            self.postprocessing.fit(self.estimator.predict_scores(calib.X, calib.s), calib.y, calib.s)
        self._fitted = True
        return self

    def predict(self, part: Partition) -> Prediction:
        if not self._fitted:
            raise NotFitted("pipeline must be fitted first")
        scores = self.estimator.predict_scores(part.X, part.s)
        decisions = None
        if self.postprocessing is not None:
            decisions = self.postprocessing.adjust(scores, part.s)
        return Prediction(scores, decisions)

    def to_dict(self) -> dict[str, Any]:
        if not self._fitted:
            raise NotFitted("pipeline must be fitted first")
        comps = {f: getattr(self, f) for f in FAMILIES}
        return {
            "method_kind": {f: (c.kind if c is not None else None) for f, c in comps.items()},
            "hyperparams": {f: dict(c.params) for f, c in comps.items() if c is not None},
            "learned": {f: c.learned_state() for f, c in comps.items() if c is not None},
            "seeds": {f: c.seed for f, c in comps.items() if c is not None},
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> MethodPipeline:
        parts: dict[str, Method | None] = {}
        for family in FAMILIES:
            kind = payload["method_kind"].get(family)
            if kind is None:
                parts[family] = None
                continue
            parts[family] = get_method(family, kind).from_dict(
                {
                    "kind": kind,
                    "hyperparams": payload["hyperparams"][family],
                    "learned": payload["learned"][family],
                    "seed": payload["seeds"][family],
                }
            )
        return cls(parts["estimator"], parts["preprocessing"], parts["postprocessing"], _fitted=True)  # type: ignore[arg-type]
