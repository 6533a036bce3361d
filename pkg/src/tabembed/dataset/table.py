"""Typed tabular data and CSV ingestion."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from tabembed.errors import ConfigurationError, DegenerateTargetError, ParseError

MISSING_TOKEN = "__missing__"
DEFAULT_MISSING_VALUES = ("", "?", "NA", "N/A", "nan", "NaN")
CATEGORICAL_THRESHOLD = 10

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
TARGET = "target"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    role: str
    levels: tuple[str, ...] = ()
    missing_token: str = MISSING_TOKEN

    def __post_init__(self) -> None:
        if self.role not in (CONTINUOUS, CATEGORICAL, TARGET):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role == CONTINUOUS and self.levels:
            raise ValueError("continuous columns carry no levels")
        if list(self.levels) != sorted(set(self.levels)):
            raise ValueError(f"levels of {self.name!r} must be unique and sorted")


@dataclass(frozen=True, eq=False)
class DataTable:
    """Column-oriented table.

    Categorical and target columns hold ``str`` arrays; continuous columns hold
    float64 arrays where NaN marks a missing cell. Arrays are read-only.
    """

    schema: tuple[ColumnSchema, ...]
    columns: dict[str, np.ndarray] = field(repr=False)
    target_name: str

    def __post_init__(self) -> None:
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        if set(names) != set(self.columns):
            raise ValueError("schema and column arrays disagree")
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("ragged columns")
        if self.target_name not in self.columns:
            raise ConfigurationError(f"target column {self.target_name!r} not present")
        for arr in self.columns.values():
            arr.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def task(self) -> str:
        k = len(self.column_schema(self.target_name).levels)
        if k < 2:
            raise DegenerateTargetError(f"target has {k} level(s)")
        return "binary" if k == 2 else "multi"

    @property
    def target(self) -> np.ndarray:
        return self.columns[self.target_name]

    @property
    def target_levels(self) -> tuple[str, ...]:
        return self.column_schema(self.target_name).levels

    @property
    def feature_schema(self) -> tuple[ColumnSchema, ...]:
        return tuple(c for c in self.schema if c.role != TARGET)

    def column_schema(self, name: str) -> ColumnSchema:
        for c in self.schema:
            if c.name == name:
                return c
        raise KeyError(name)

    def continuous_columns(self) -> list[str]:
        return [c.name for c in self.schema if c.role == CONTINUOUS]

    def categorical_columns(self) -> list[str]:
        return [c.name for c in self.schema if c.role == CATEGORICAL]

    def take(self, indices: Sequence[int] | np.ndarray) -> DataTable:
        """Row subset; the schema (including levels) is kept unchanged."""
        idx = np.asarray(indices, dtype=np.int64)
        cols = {k: v[idx].copy() for k, v in self.columns.items()}
        return DataTable(self.schema, cols, self.target_name)

    def with_columns(self, schema: Sequence[ColumnSchema], columns: dict[str, np.ndarray]) -> DataTable:
        return DataTable(tuple(schema), dict(columns), self.target_name)

    def rows(self) -> Iterator[tuple]:
        arrays = [self.columns[c.name] for c in self.schema]
        for i in range(self.n_rows):
            yield tuple(a[i] for a in arrays)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([c.name for c in self.schema])
            for row in self.rows():
                writer.writerow([_format_cell(v) for v in row])


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def _is_number(text: str) -> bool:
    try:
        value = float(text)
    except ValueError:
        return False
    return math.isfinite(value)


def infer_column(
    name: str,
    raw: Sequence[str],
    missing_values: Iterable[str] = DEFAULT_MISSING_VALUES,
    is_target: bool = False,
) -> tuple[ColumnSchema, np.ndarray]:
    """Infer the role of one column and convert its raw cells.

    Missing cells are excluded from the distinct-value count; in categorical
    columns they become the ``__missing__`` level, in continuous ones NaN.
    """
    missing = set(missing_values)
    present = [v for v in raw if v not in missing]
    distinct = set(present)
    numeric = all(_is_number(v) for v in distinct)
    if not is_target and numeric and len(distinct) >= CATEGORICAL_THRESHOLD:
        values = np.array([float(v) if v not in missing else np.nan for v in raw], dtype=np.float64)
        return ColumnSchema(name, CONTINUOUS), values
    cells = [v if v not in missing else MISSING_TOKEN for v in raw]
    levels = tuple(sorted(set(cells)))
    role = TARGET if is_target else CATEGORICAL
    return ColumnSchema(name, role, levels), np.array(cells, dtype=str)


def table_from_rows(
    header: Sequence[str],
    rows: Sequence[Sequence[str]],
    target_name: str,
    missing_values: Iterable[str] = DEFAULT_MISSING_VALUES,
) -> DataTable:
    if target_name not in header:
        raise ConfigurationError(f"target column {target_name!r} not in header {list(header)}")
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", row_index=i)
    missing_values = tuple(missing_values)
    schema, columns = [], {}
    for j, name in enumerate(header):
        col, arr = infer_column(name, [r[j] for r in rows], missing_values, is_target=name == target_name)
        schema.append(col)
        columns[name] = arr
    return DataTable(tuple(schema), columns, target_name)


def read_rows(
    path: str | Path,
    delimiter: str | None = ",",
    header: bool = True,
    strip: bool = True,
) -> tuple[list[str] | None, list[list[str]]]:
    """Read delimited text. ``delimiter=None`` splits on runs of whitespace.

    Blank lines are skipped; they do not count toward row indices.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        if delimiter is None:
            records = (line.split() for line in fh)
        else:
            records = csv.reader(fh, delimiter=delimiter)
        rows = []
        for rec in records:
            if not rec or all(not c.strip() for c in rec):
                continue
            rows.append([c.strip() for c in rec] if strip else list(rec))
    names = None
    if header:
        if not rows:
            raise ParseError("empty file, header expected")
        names = rows.pop(0)
    return names, rows


def load_csv(
    path: str | Path,
    target_name: str,
    delimiter: str | None = ",",
    header: bool = True,
    column_names: Sequence[str] | None = None,
    missing_values: Iterable[str] = DEFAULT_MISSING_VALUES,
) -> DataTable:
    """Load a delimited file into a :class:`DataTable` with inferred schema."""
    names, rows = read_rows(path, delimiter=delimiter, header=header)
    if column_names is not None:
        names = list(column_names)
    if names is None:
        names = [f"col_{j}" for j in range(len(rows[0]) if rows else 0)]
    return table_from_rows(names, rows, target_name, missing_values)


def relabel_schema(table: DataTable, name: str, column: ColumnSchema) -> tuple[ColumnSchema, ...]:
    return tuple(column if c.name == name else c for c in table.schema)


__all__ = [
    "CATEGORICAL",
    "CONTINUOUS",
    "MISSING_TOKEN",
    "TARGET",
    "ColumnSchema",
    "DataTable",
    "infer_column",
    "load_csv",
    "read_rows",
    "relabel_schema",
    "table_from_rows",
]
