"""Whole-table encoding: per-column encoders, target block, embedding vocabularies."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tabembed.dataset.table import ColumnSchema, DataTable
from tabembed.encoders.core import EncoderSpec, FittedEncoder, fit


@dataclass(frozen=True)
class Block:
    source: str
    kind: str
    start: int
    width: int
    names: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class EncodedTable:
    """Encoded features of one split plus the encoded target.

    ``vocabularies[j]`` lists the distinct train values of output column j in
    ascending order; :meth:`indices` maps a value to its 1-based position and
    anything else to 0.
    """

    source_schema: tuple[ColumnSchema, ...]
    blocks: tuple[Block, ...]
    values: np.ndarray
    target: np.ndarray
    target_names: tuple[str, ...]
    vocabularies: tuple[tuple[float, ...], ...]
    task: str

    def __post_init__(self) -> None:
        width = sum(b.width for b in self.blocks)
        if self.values.shape[1] != width:
            raise ValueError(f"block widths sum to {width}, values have {self.values.shape[1]} columns")
        if len(self.vocabularies) != width:
            raise ValueError("one vocabulary per output column expected")
        if not np.isfinite(self.values).all():
            raise ValueError("encoded values must be finite")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(n for b in self.blocks for n in b.names)

    @property
    def vocab_sizes(self) -> tuple[int, ...]:
        """Distinct fitted values per output column (C_j)."""
        return tuple(len(v) for v in self.vocabularies)

    def indices(self) -> np.ndarray:
        out = np.zeros(self.values.shape, dtype=np.int64)
        for j, vocab in enumerate(self.vocabularies):
            v = np.asarray(vocab, dtype=np.float64)
            col = self.values[:, j]
            pos = np.searchsorted(v, col)
            pos_c = np.minimum(pos, len(v) - 1)
            hit = v[pos_c] == col
            out[:, j] = np.where(hit, pos_c + 1, 0)
        return out

    def header(self) -> dict:
        return {
            "task": self.task,
            "blocks": [
                {"source": b.source, "kind": b.kind, "start": b.start, "width": b.width, "names": list(b.names)}
                for b in self.blocks
            ],
            "target_names": list(self.target_names),
            "vocabularies": [list(v) for v in self.vocabularies],
            "source_schema": [
                {"name": c.name, "role": c.role, "levels": list(c.levels)} for c in self.source_schema
            ],
        }

    def save(self, csv_path: str | Path) -> Path:
        """Write values and target as CSV and the block structure as ``<name>.json``."""
        csv_path = Path(csv_path)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(self.column_names) + list(self.target_names))
            for row, tgt in zip(self.values.tolist(), self.target.tolist()):
                writer.writerow([repr(v) for v in row] + [repr(v) for v in tgt])
        header_path = csv_path.with_suffix(".json")
        header_path.write_text(json.dumps(self.header(), indent=1) + "\n", encoding="utf-8")
        return header_path

    @classmethod
    def load(cls, csv_path: str | Path) -> EncodedTable:
        csv_path = Path(csv_path)
        header = json.loads(csv_path.with_suffix(".json").read_text(encoding="utf-8"))
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        width = sum(b["width"] for b in header["blocks"])
        blocks = tuple(Block(b["source"], b["kind"], b["start"], b["width"], tuple(b["names"])) for b in header["blocks"])
        schema = tuple(ColumnSchema(c["name"], c["role"], tuple(c["levels"])) for c in header["source_schema"])
        return cls(
            schema,
            blocks,
            data[:, :width],
            data[:, width:],
            tuple(header["target_names"]),
            tuple(tuple(v) for v in header["vocabularies"]),
            header["task"],
        )


@dataclass(frozen=True)
class EncodedSplits:
    train: EncodedTable
    validation: EncodedTable
    test: EncodedTable
    encoders: tuple[FittedEncoder, ...]

    def save_encoders(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps([e.to_json() for e in self.encoders], indent=1) + "\n", encoding="utf-8")


def encode_target(y, target_levels: tuple[str, ...]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Binary -> one 0/1 column for the last level; multi -> one-hot over levels."""
    y = np.asarray(y, dtype=str)
    if len(target_levels) == 2:
        return (y == target_levels[1]).astype(np.float64)[:, None], (target_levels[1],)
    out = np.zeros((len(y), len(target_levels)), dtype=np.float64)
    index = {lvl: i for i, lvl in enumerate(target_levels)}
    for r, v in enumerate(y.tolist()):
        out[r, index[v]] = 1.0
    return out, tuple(target_levels)


def encode_table(
    train: DataTable,
    validation: DataTable,
    test: DataTable,
    spec: EncoderSpec,
) -> EncodedSplits:
    """Fit one encoder per categorical feature on ``train`` and encode all splits.

    Continuous columns must have been discretized beforehand.
    """
    if train.continuous_columns():
        raise ValueError(f"continuous columns left unencoded: {train.continuous_columns()}")
    target_levels = train.target_levels
    task = train.task
    encoders = []
    blocks = []
    start = 0
    features = list(train.feature_schema)
    for col in features:
        enc = fit(spec, train.columns[col.name], train.target, column=col.name, target_levels=target_levels)
        encoders.append(enc)
        blocks.append(Block(col.name, spec.kind, start, enc.output_arity, enc.output_names))
        start += enc.output_arity

    def encode(table: DataTable) -> tuple[np.ndarray, np.ndarray]:
        parts = [enc.transform(table.columns[enc.column]) for enc in encoders]
        values = np.hstack(parts) if parts else np.zeros((table.n_rows, 0))
        target, _ = encode_target(table.target, target_levels)
        return values, target

    train_values, train_target = encode(train)
    vocabularies = tuple(tuple(np.unique(train_values[:, j]).tolist()) for j in range(train_values.shape[1]))
    _, target_names = encode_target(train.target[:0], target_levels)
    schema = tuple(features)

    def wrap(values, target) -> EncodedTable:
        return EncodedTable(schema, tuple(blocks), values, target, target_names, vocabularies, task)

    return EncodedSplits(
        wrap(train_values, train_target),
        wrap(*encode(validation)),
        wrap(*encode(test)),
        tuple(encoders),
    )
