"""Hyperparameter search spaces and seeded sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterator, Mapping

from ..errors import InvalidSpace
from ..rng import Xoshiro256StarStar

SPACE_TYPES = ("int", "float", "logfloat", "categorical")


@dataclass(frozen=True)
class ParamSpace:
    """One dimension: ranged (``int``/``float``/``logfloat``) or ``categorical``.

    Ranged dimensions may carry an explicit ``grid`` so the grid sampler can
    enumerate them.
    """

    type: str
    low: float | int | None = None
    high: float | int | None = None
    choices: tuple[Any, ...] | None = None
    grid: tuple[Any, ...] | None = None

    def __post_init__(self) -> None:
        if self.type not in SPACE_TYPES:
            raise InvalidSpace(f"unknown space type {self.type!r}", "type")
        if self.type == "categorical":
            if not self.choices:
                raise InvalidSpace("categorical choices must be non-empty", "choices")
            if len(set(map(repr, self.choices))) != len(self.choices):
                raise InvalidSpace("categorical choices must be unique", "choices")
            object.__setattr__(self, "choices", tuple(self.choices))
            return
        if self.low is None or self.high is None:
            raise InvalidSpace(f"{self.type} dimension needs low and high", "low" if self.low is None else "high")
        if not self.low < self.high:
            raise InvalidSpace(f"low must be < high (got {self.low} >= {self.high})", "low")
        if self.type == "logfloat" and self.low <= 0:
            raise InvalidSpace("logfloat bounds must be strictly positive", "low")
        if self.type == "int" and (int(self.low) != self.low or int(self.high) != self.high):
            raise InvalidSpace("int bounds must be integers", "low" if int(self.low) != self.low else "high")
        if self.grid is not None:
            grid = tuple(self.grid)
            if not grid or any(not (self.low <= v <= self.high) for v in grid):
                raise InvalidSpace("grid values must be non-empty and lie within [low, high]", "grid")
            object.__setattr__(self, "grid", grid)

    @property
    def is_finite(self) -> bool:
        return self.type == "categorical" or self.grid is not None

    def values(self) -> tuple[Any, ...]:
        if self.type == "categorical":
            return self.choices or ()
        if self.grid is None:
            raise InvalidSpace(f"{self.type} dimension has no explicit grid")
        return self.grid

    def sample(self, rng: Xoshiro256StarStar) -> Any:
        if self.type == "categorical":
            return rng.choice(self.choices or ())
        if self.type == "int":
            lo, hi = int(self.low), int(self.high)
            return lo + rng.below(hi - lo + 1)
        if self.type == "float":
            return rng.uniform(float(self.low), float(self.high))
        lo, hi = float(self.low), float(self.high)
        value = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        return min(max(value, lo), hi)  # exp/log round-off can leave the interval

    def to_dict(self) -> dict[str, Any]:
        if self.type == "categorical":
            return {"type": "categorical", "choices": list(self.choices or ())}
        out: dict[str, Any] = {"type": self.type, "low": self.low, "high": self.high}
        if self.grid is not None:
            out["grid"] = list(self.grid)
        return out

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> ParamSpace:
        kind = payload.get("type")
        if kind == "categorical":
            return cls("categorical", choices=tuple(payload.get("choices") or ()))
        grid = payload.get("grid")
        return cls(kind, payload.get("low"), payload.get("high"), grid=tuple(grid) if grid is not None else None)


class HyperparameterSpace(Mapping[str, ParamSpace]):
    """Ordered mapping of parameter name to :class:`ParamSpace`.

    Declaration order is significant: it fixes both the draw order of the
    random sampler and the nesting order of the grid sampler.
    """

    def __init__(self, params: Mapping[str, ParamSpace | Mapping[str, Any]] | None = None):
        self._params: dict[str, ParamSpace] = {}
        for name, p in (params or {}).items():
            self._params[name] = p if isinstance(p, ParamSpace) else ParamSpace.from_dict(p)

    def __getitem__(self, key: str) -> ParamSpace:
        return self._params[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HyperparameterSpace):
            return NotImplemented
        return list(self._params.items()) == list(other._params.items())

    def __repr__(self) -> str:
        return f"HyperparameterSpace({self.to_dict()!r})"

    def prefixed(self, prefix: str) -> HyperparameterSpace:
        return HyperparameterSpace({f"{prefix}.{k}": v for k, v in self._params.items()})

    def merged(self, *others: HyperparameterSpace) -> HyperparameterSpace:
        params = dict(self._params)
        for other in others:
            params.update(other._params)
        return HyperparameterSpace(params)

    def to_dict(self) -> dict[str, Any]:
        return {k: v.to_dict() for k, v in self._params.items()}


def sample_hyperparams(space: HyperparameterSpace, rng: Xoshiro256StarStar) -> dict[str, Any]:
    """One assignment; draws dimensions in declaration order, advancing ``rng``."""
    return {name: dim.sample(rng) for name, dim in space.items()}
