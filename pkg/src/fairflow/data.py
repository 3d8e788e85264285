"""Tabular datasets: schema-typed loading, deterministic splits, feature encoding.

A :class:`Dataset` is columnar internally (one numpy array per column) and
immutable. Numeric columns are ``float64``, categorical and sensitive columns
are object arrays of ``str`` and the label is ``int8`` in {0, 1}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Literal, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    EmptyDataset,
    InsufficientGroups,
    InvalidFractions,
    InvalidSplitSpec,
    LabelNotBinary,
    MissingColumn,
    SchemaViolation,
    TypeViolation,
    UnmappedSplitValue,
)
from .rng import Xoshiro256StarStar

ColumnKind = Literal["numeric", "categorical", "binary_label", "sensitive_group"]
COLUMN_KINDS: tuple[str, ...] = ("numeric", "categorical", "binary_label", "sensitive_group")
PARTITIONS: tuple[str, ...] = ("train", "validation", "test")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind

    def __post_init__(self) -> None:
        if self.kind not in COLUMN_KINDS:
            raise SchemaViolation(f"column {self.name!r}: unknown kind {self.kind!r}")
        if not self.name:
            raise SchemaViolation("column names must be non-empty")

    def to_dict(self) -> dict[str, str]:
        return {"name": self.name, "kind": self.kind}


def validate_schema(schema: Sequence[ColumnSpec]) -> tuple[ColumnSpec, ...]:
    schema = tuple(schema)
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise SchemaViolation(f"duplicate column names: {dupes}")
    for kind in ("binary_label", "sensitive_group"):
        count = sum(c.kind == kind for c in schema)
        if count != 1:
            raise SchemaViolation(f"schema needs exactly one {kind} column, found {count}")
    return schema


def _canonical(value: Any) -> str:
    """String form used to match split-column values against a partition map."""
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        return str(int(value))
    return str(value)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class Dataset:
    """Immutable typed table with exactly one label and one sensitive column."""

    def __init__(self, columns: Sequence[ColumnSpec], values: Mapping[str, Iterable[Any]]):
        self.columns = validate_schema(columns)
        data: dict[str, np.ndarray] = {}
        n_rows: int | None = None
        for col in self.columns:
            if col.name not in values:
                raise MissingColumn(f"no values for column {col.name!r}")
            raw = values[col.name]
            if col.kind == "numeric":
                arr = np.asarray(raw, dtype=np.float64).copy()
                if not np.all(np.isfinite(arr)):
                    raise TypeViolation(f"non-finite value in numeric column {col.name!r}", column=col.name)
            elif col.kind == "binary_label":
                arr = np.asarray(raw).copy()
                if arr.size and not np.all(np.isin(arr, (0, 1))):
                    raise LabelNotBinary(f"label column {col.name!r} has values outside {{0, 1}}")
                arr = arr.astype(np.int8)
            else:
                arr = np.array([str(v) for v in raw], dtype=object)
            if n_rows is None:
                n_rows = len(arr)
            elif len(arr) != n_rows:
                raise SchemaViolation(f"column {col.name!r} has {len(arr)} rows, expected {n_rows}")
            data[col.name] = _frozen(arr)
        self._data = data
        self.n_rows = int(n_rows or 0)
        if self.n_rows == 0:
            raise EmptyDataset("dataset has no rows")
        if len(self.group_levels) < 2:
            raise InsufficientGroups(
                f"sensitive column {self.group_column!r} needs at least 2 distinct values"
            )

    def __repr__(self) -> str:
        cols = ", ".join(f"{c.name}:{c.kind}" for c in self.columns)
        return f"Dataset(n_rows={self.n_rows}, columns=[{cols}])"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.columns != other.columns or self.n_rows != other.n_rows:
            return False
        return all(np.array_equal(self._data[c.name], other._data[c.name]) for c in self.columns)

    __hash__ = None  # type: ignore[assignment]

    def column(self, name: str) -> np.ndarray:
        try:
            return self._data[name]
        except KeyError:
            raise MissingColumn(f"unknown column {name!r}") from None

    def spec(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise MissingColumn(f"unknown column {name!r}")

    @property
    def label_column(self) -> str:
        return next(c.name for c in self.columns if c.kind == "binary_label")

    @property
    def group_column(self) -> str:
        return next(c.name for c in self.columns if c.kind == "sensitive_group")

    @property
    def labels(self) -> np.ndarray:
        return self._data[self.label_column]

    @property
    def groups(self) -> np.ndarray:
        return self._data[self.group_column]

    @cached_property
    def group_levels(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self._data[self.group_column].tolist()))

    def levels(self, name: str) -> tuple[str, ...]:
        """Distinct values of a categorical column in first-appearance order."""
        return tuple(dict.fromkeys(self.column(name).tolist()))

    def rows(self) -> list[tuple[Any, ...]]:
        cols = [self._data[c.name].tolist() for c in self.columns]
        return list(zip(*cols))

    def take(self, index: Sequence[int] | np.ndarray) -> dict[str, np.ndarray]:
        index = np.asarray(index, dtype=np.int64)
        return {name: arr[index] for name, arr in self._data.items()}


# -- loading -------------------------------------------------------------------


def _parse_cell(token: Any, col: ColumnSpec, row: int) -> Any:
    """Convert one raw cell; ``row`` is the 1-based data row for messages."""
    if token is None or (isinstance(token, str) and token.strip() == ""):
        raise TypeViolation(f"row {row}, column {col.name!r}: missing value", row=row, column=col.name)
    if isinstance(token, float) and math.isnan(token):
        raise TypeViolation(f"row {row}, column {col.name!r}: missing value", row=row, column=col.name)
    if col.kind == "numeric":
        if isinstance(token, bool) or not isinstance(token, (str, int, float, np.integer, np.floating)):
            raise TypeViolation(
                f"row {row}, column {col.name!r}: {type(token).__name__} is not numeric", row=row, column=col.name
            )
        try:
            value = float(token)
        except ValueError:
            raise TypeViolation(
                f"row {row}, column {col.name!r}: {token!r} is not numeric", row=row, column=col.name
            ) from None
        if not math.isfinite(value):
            raise TypeViolation(f"row {row}, column {col.name!r}: non-finite {token!r}", row=row, column=col.name)
        return value
    if col.kind == "binary_label":
        try:
            value = float(token)
        except (TypeError, ValueError):
            raise LabelNotBinary(f"row {row}, column {col.name!r}: label {token!r} is not 0/1") from None
        if value not in (0.0, 1.0):
            raise LabelNotBinary(f"row {row}, column {col.name!r}: label {token!r} is not 0/1")
        return int(value)
    return _canonical(token) if not isinstance(token, str) else token


def _build(schema: tuple[ColumnSpec, ...], records: Mapping[str, Sequence[Any]], n: int) -> Dataset:
    if n == 0:
        raise EmptyDataset("file has no data rows")
    values: dict[str, list[Any]] = {c.name: [] for c in schema}
    for c in schema:
        column = records[c.name]
        out = values[c.name]
        for i in range(n):
            out.append(_parse_cell(column[i], c, i + 1))
    return Dataset(schema, values)


def load_csv(path: str | Path, schema: Sequence[ColumnSpec]) -> Dataset:
    """Load a UTF-8, RFC-4180 CSV file with a header row.

    Columns not named in ``schema`` are ignored. Any blank cell is a
    :class:`TypeViolation`; rows are never silently dropped.
    """
    schema = validate_schema(schema)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        positions = {name: i for i, name in enumerate(header)}
        missing = [c.name for c in schema if c.name not in positions]
        if missing:
            raise MissingColumn(f"{path}: columns {missing} not in header")
        records: dict[str, list[str]] = {c.name: [] for c in schema}
        n = 0
        for line in reader:
            if not line:
                continue
            n += 1
            for c in schema:
                j = positions[c.name]
                records[c.name].append(line[j] if j < len(line) else "")
    return _build(schema, records, n)


def load_parquet(path: str | Path, schema: Sequence[ColumnSpec]) -> Dataset:
    """Load a flat Parquet file; same contract as :func:`load_csv`."""
    import pyarrow.parquet as pq

    schema = validate_schema(schema)
    table = pq.read_table(path)
    missing = [c.name for c in schema if c.name not in table.column_names]
    if missing:
        raise MissingColumn(f"{path}: columns {missing} not in file")
    records = {c.name: table.column(c.name).to_pylist() for c in schema}
    return _build(schema, records, table.num_rows)


def load_table(path: str | Path, schema: Sequence[ColumnSpec]) -> Dataset:
    """Dispatch on file suffix (``.parquet``/``.pq`` or anything else as CSV)."""
    if Path(path).suffix.lower() in (".parquet", ".pq"):
        return load_parquet(path, schema)
    return load_csv(path, schema)


def _format_cell(value: Any, kind: str) -> str:
    if kind == "numeric":
        return repr(float(value))
    return str(value)


def write_csv(data: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([c.name for c in data.columns])
        kinds = [c.kind for c in data.columns]
        for row in data.rows():
            writer.writerow([_format_cell(v, k) for v, k in zip(row, kinds)])


def write_parquet(data: Dataset, path: str | Path) -> None:
    import pyarrow as pa
    import pyarrow.parquet as pq

    arrays = {}
    for c in data.columns:
        col = data.column(c.name)
        if c.kind == "numeric":
            arrays[c.name] = pa.array(col, type=pa.float64())
        elif c.kind == "binary_label":
            arrays[c.name] = pa.array(col.astype(np.int64), type=pa.int64())
        else:
            arrays[c.name] = pa.array(col.tolist(), type=pa.string())
    pq.write_table(pa.table(arrays), path)


# -- splitting -----------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    """How rows are routed to train/validation/test.

    ``method="random"`` uses ``proportions`` and ``seed``;
    ``method="column"`` uses ``column`` and ``mapping`` (value -> partition).
    """

    method: Literal["random", "column"] = "random"
    proportions: tuple[float, float, float] | None = (0.6, 0.2, 0.2)
    seed: int = 0
    column: str | None = None
    mapping: Mapping[str, str] | None = None

    def __post_init__(self) -> None:
        if self.method == "random":
            if self.proportions is None or len(self.proportions) != 3:
                raise InvalidSplitSpec("random split needs three proportions")
            props = tuple(float(p) for p in self.proportions)
            if not all(0.0 < p < 1.0 for p in props):
                raise InvalidSplitSpec(f"proportions must each lie in (0, 1), got {props}")
            if abs(sum(props) - 1.0) > 1e-9:
                raise InvalidSplitSpec(f"proportions must sum to 1, got {sum(props)!r}")
            if int(self.seed) < 0:
                raise InvalidSplitSpec("seed must be unsigned")
            object.__setattr__(self, "proportions", props)
        elif self.method == "column":
            if not self.column or not self.mapping:
                raise InvalidSplitSpec("column split needs a column and a value->partition map")
            mapping = {_canonical(k): v for k, v in self.mapping.items()}
            bad = {v for v in mapping.values() if v not in PARTITIONS}
            if bad:
                raise InvalidSplitSpec(f"unknown partitions in map: {sorted(bad)}")
            object.__setattr__(self, "mapping", mapping)
        else:
            raise InvalidSplitSpec(f"unknown split method {self.method!r}")

    def to_dict(self) -> dict[str, Any]:
        if self.method == "random":
            return {"method": "random", "proportions": list(self.proportions or ()), "seed": int(self.seed)}
        return {"method": "column", "column": self.column, "mapping": dict(self.mapping or {})}


def random_cut_points(n: int, proportions: Sequence[float]) -> tuple[int, int]:
    p_train, p_val = proportions[0], proportions[1]
    return math.floor(n * p_train), math.floor(n * (p_train + p_val))


@dataclass(frozen=True)
class Partition:
    """Encoded model inputs for one partition: ``X``, ``y`` and sensitive ``s``."""

    X: np.ndarray
    y: np.ndarray
    s: np.ndarray
    index: np.ndarray
    feature_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)


class FeatureEncoder:
    """Numeric passthrough + one-hot categoricals (levels from the train partition).

    Unseen levels at transform time map to the all-zeros block. The sensitive
    column is only encoded when ``include_sensitive`` is set.
    """

    def __init__(self, columns: Sequence[dict[str, Any]]):
        self.columns = [dict(c) for c in columns]

    @classmethod
    def fit(
        cls,
        data: Dataset,
        index: np.ndarray,
        *,
        include_sensitive: bool = False,
        exclude: Sequence[str] = (),
    ) -> FeatureEncoder:
        columns = []
        for c in data.columns:
            if c.name in exclude or c.kind == "binary_label":
                continue
            if c.kind == "sensitive_group" and not include_sensitive:
                continue
            if c.kind == "numeric":
                columns.append({"name": c.name, "kind": "numeric"})
            else:
                levels = list(dict.fromkeys(data.column(c.name)[index].tolist()))
                columns.append({"name": c.name, "kind": "categorical", "levels": levels})
        return cls(columns)

    @property
    def feature_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for c in self.columns:
            if c["kind"] == "numeric":
                names.append(c["name"])
            else:
                names.extend(f"{c['name']}={lvl}" for lvl in c["levels"])
        return tuple(names)

    def transform(self, values: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        blocks = []
        for c in self.columns:
            col = values[c["name"]]
            if c["kind"] == "numeric":
                blocks.append(np.asarray(col, dtype=np.float64).reshape(n, 1))
            else:
                levels = c["levels"]
                lookup = {lvl: j for j, lvl in enumerate(levels)}
                block = np.zeros((n, len(levels)))
                for i, v in enumerate(col):
                    j = lookup.get(v)
                    if j is not None:
                        block[i, j] = 1.0
                blocks.append(block)
        if not blocks:
            return np.zeros((n, 0))
        return np.hstack(blocks)

    def to_dict(self) -> dict[str, Any]:
        return {"columns": [dict(c) for c in self.columns]}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> FeatureEncoder:
        return cls(payload["columns"])


@dataclass(frozen=True, eq=False)
class SplitDataset:
    base: Dataset
    assignment: np.ndarray
    split_spec: SplitSpec
    include_sensitive: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def indices(self, partition: str) -> np.ndarray:
        if partition not in PARTITIONS:
            raise KeyError(partition)
        return np.flatnonzero(self.assignment == partition)

    def sizes(self) -> dict[str, int]:
        return {p: int(np.sum(self.assignment == p)) for p in PARTITIONS}

    @property
    def encoder(self) -> FeatureEncoder:
        if "encoder" not in self._cache:
            exclude = [self.split_spec.column] if self.split_spec.method == "column" else []
            self._cache["encoder"] = FeatureEncoder.fit(
                self.base,
                self.indices("train"),
                include_sensitive=self.include_sensitive,
                exclude=[c for c in exclude if c],
            )
        return self._cache["encoder"]

    def partition(self, name: str) -> Partition:
        if name not in self._cache:
            idx = self.indices(name)
            values = self.base.take(idx)
            X = self.encoder.transform(values, len(idx))
            X.setflags(write=False)
            self._cache[name] = Partition(
                X=X,
                y=_frozen(values[self.base.label_column].astype(np.int64)),
                s=_frozen(values[self.base.group_column]),
                index=_frozen(idx),
                feature_names=self.encoder.feature_names,
            )
        return self._cache[name]

    @property
    def train(self) -> Partition:
        return self.partition("train")

    @property
    def validation(self) -> Partition:
        return self.partition("validation")

    @property
    def test(self) -> Partition:
        return self.partition("test")


def create_splits(data: Dataset, spec: SplitSpec, *, include_sensitive: bool = False) -> SplitDataset:
    """Assign every row to exactly one of train/validation/test.

    Random splits shuffle row indices with xoshiro256** seeded by
    ``spec.seed`` and cut at ``floor(n*p_train)`` and
    ``floor(n*(p_train + p_val))``; the remainder goes to test. Shuffling is
    unstratified.
    """
    n = data.n_rows
    assignment = np.empty(n, dtype=object)
    if spec.method == "random":
        order = Xoshiro256StarStar(int(spec.seed)).permutation(n)
        cut1, cut2 = random_cut_points(n, spec.proportions or ())
        for pos, row in enumerate(order):
            assignment[row] = "train" if pos < cut1 else ("validation" if pos < cut2 else "test")
    else:
        mapping = spec.mapping or {}
        column = data.column(spec.column or "")
        unmapped = sorted({_canonical(v) for v in column.tolist()} - set(mapping))
        if unmapped:
            raise UnmappedSplitValue(f"split column {spec.column!r} values {unmapped} not in partition map")
        for i, v in enumerate(column.tolist()):
            assignment[i] = mapping[_canonical(v)]
    empty = [p for p in PARTITIONS if not np.any(assignment == p)]
    if empty:
        raise DegenerateSplit(f"empty partitions: {empty}")
    return SplitDataset(data, _frozen(assignment), spec, include_sensitive)


# -- synthetic data --------------------------------------------------------------


def _group_sizes(n: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment; ties go to the lower group index."""
    raw = [n * f for f in fractions]
    sizes = [math.floor(r) for r in raw]
    remainder = n - sum(sizes)
    by_fraction = sorted(range(len(raw)), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in by_fraction[:remainder]:
        sizes[i] += 1
    return sizes


def generate_synthetic(
    n_rows: int,
    group_fractions: Sequence[float],
    base_rates: Sequence[float],
    separation: float | Sequence[float],
    seed: int,
) -> Dataset:
    """Two-feature Gaussian data with a controllable group/label structure.

    For a row in group ``g`` (index ``k`` of ``K``) with label ``y``::

        x1 ~ N(separation[g] * y, 1)                  # label signal
        x2 ~ N(separation[g] * (k - (K - 1) / 2), 1)  # group proxy

    Groups are named ``A``, ``B``, ... Group sizes follow ``group_fractions``
    by largest remainder, rows are shuffled, then each row draws its label and
    its two features in that order.
    """
    k = len(group_fractions)
    if isinstance(separation, (int, float)):
        separation = [float(separation)] * k
    separation = [float(v) for v in separation]
    if k < 2 or k > 26:
        raise InvalidFractions("need between 2 and 26 groups")
    if len(base_rates) != k or len(separation) != k:
        raise InvalidFractions("group_fractions, base_rates and separation must have equal length")
    if any(f <= 0 for f in group_fractions) or abs(sum(group_fractions) - 1.0) > 1e-9:
        raise InvalidFractions(f"group fractions must be positive and sum to 1, got {list(group_fractions)}")
    if not all(0.0 < b < 1.0 for b in base_rates):
        raise InvalidFractions(f"base rates must lie in (0, 1), got {list(base_rates)}")
    if n_rows < 20:
        raise InvalidFractions("n_rows must be at least 20")
    sizes = _group_sizes(n_rows, group_fractions)
    if min(sizes) == 0:
        raise InvalidFractions("a group fraction is too small for n_rows")

    rng = Xoshiro256StarStar(int(seed))
    membership = [g for g, size in enumerate(sizes) for _ in range(size)]
    rng.shuffle(membership)
    names = [chr(ord("A") + g) for g in range(k)]
    centre = (k - 1) / 2.0
    x1, x2, grp, lab = [], [], [], []
    for g in membership:
        y = 1 if rng.random() < base_rates[g] else 0
        x1.append(rng.normal(separation[g] * y, 1.0))
        x2.append(rng.normal(separation[g] * (g - centre), 1.0))
        grp.append(names[g])
        lab.append(y)
    schema = [
        ColumnSpec("x1", "numeric"),
        ColumnSpec("x2", "numeric"),
        ColumnSpec("group", "sensitive_group"),
        ColumnSpec("label", "binary_label"),
    ]
    return Dataset(schema, {"x1": x1, "x2": x2, "group": grp, "label": lab})
