"""Bin edges, tree-based column discretization and table transforms."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tabembed.dataset.table import CATEGORICAL, MISSING_TOKEN, ColumnSchema, DataTable
from tabembed.discretizer.pruning import (
    DegenerateColumn,
    PruningPath,
    cv_depth_search,
    prune,
    pruning_path,
    select_alpha,
)
from tabembed.discretizer.tree import TreeNode, grow_tree


@dataclass(frozen=True)
class BinEdges:
    """Sorted cut points; bin i is the interval (edges[i-1], edges[i]].

    The first bin is open below and the last open above, so every real value
    lands in exactly one bin. NaN maps to -1.
    """

    column: str
    edges: tuple[float, ...]
    chosen_alpha: float = 0.0
    degenerate: bool = False

    def __post_init__(self) -> None:
        e = [float(v) for v in self.edges]
        if any(math.isnan(v) for v in e):
            raise ValueError("edges must not be NaN")
        object.__setattr__(self, "edges", tuple(sorted(set(e))))

    @property
    def n_bins(self) -> int:
        return len(self.edges) + 1

    def assign(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        idx = np.searchsorted(np.asarray(self.edges, dtype=np.float64), v, side="left").astype(np.int64)
        idx[np.isnan(v)] = -1
        return idx

    def level_names(self) -> tuple[str, ...]:
        """``bin_0``.. zero-padded so lexicographic order equals interval order."""
        width = len(str(self.n_bins - 1))
        return tuple(f"bin_{i:0{width}d}" for i in range(self.n_bins))

    def labels(self, values) -> np.ndarray:
        names = np.array(self.level_names() + (MISSING_TOKEN,), dtype=str)
        return names[self.assign(values)]

    def to_json(self) -> dict:
        return {
            "column": self.column,
            "edges": list(self.edges),
            "chosen_alpha": self.chosen_alpha,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_json(cls, payload: dict) -> BinEdges:
        return cls(payload["column"], tuple(payload["edges"]), float(payload["chosen_alpha"]), bool(payload["degenerate"]))


def extract_bins(tree: TreeNode, column: str = "", chosen_alpha: float = 0.0) -> BinEdges:
    thresholds = sorted({n.threshold for n in tree.decision_nodes()})
    return BinEdges(column, tuple(thresholds), chosen_alpha, degenerate=not thresholds)


@dataclass(frozen=True)
class DiscretizerConfig:
    max_depth: int = 7
    folds: int = 5
    seed: int = 0


@dataclass(frozen=True)
class ColumnFit:
    bins: BinEdges
    depth: int | None = None
    path: PruningPath | None = None
    fallback: bool = False
    depth_scores: dict[int, float] = field(default_factory=dict)


def fit_column(column: str, x, y, config: DiscretizerConfig = DiscretizerConfig()) -> ColumnFit:
    """Depth grid search, weakest-link path, CV alpha choice, then bin edges.

    Missing (NaN) values are ignored while fitting.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    keep = ~np.isnan(x)
    x, y = x[keep], y[keep]
    if len(x) < 2 or len(np.unique(x)) < 2 or len(np.unique(y)) < 2:
        return ColumnFit(BinEdges(column, (), 0.0, degenerate=True))
    depth, scores = cv_depth_search(x, y, range(1, config.max_depth + 1), config.folds, config.seed)
    tree = grow_tree(x, y, depth)
    try:
        path = pruning_path(tree, x, y, folds=config.folds, max_depth=depth, seed=config.seed)
        choice = select_alpha(path)
    except DegenerateColumn:
        return ColumnFit(BinEdges(column, (), 0.0, degenerate=True), depth=depth, depth_scores=scores)
    bins = extract_bins(prune(tree, choice.alpha), column, choice.alpha)
    return ColumnFit(bins, depth, path, choice.fallback, scores)


def fit_discretizer(table: DataTable, config: DiscretizerConfig = DiscretizerConfig()) -> dict[str, ColumnFit]:
    y = table.target
    return {name: fit_column(name, table.columns[name], y, config) for name in table.continuous_columns()}


def apply_bins(table: DataTable, bins: dict[str, BinEdges]) -> DataTable:
    """Replace each binned continuous column by its categorical bin labels."""
    schema, columns = [], dict(table.columns)
    for col in table.schema:
        if col.name in bins:
            labels = bins[col.name].labels(table.columns[col.name])
            levels = bins[col.name].level_names()
            if (labels == MISSING_TOKEN).any():
                levels = tuple(sorted(levels + (MISSING_TOKEN,)))
            columns[col.name] = labels
            schema.append(ColumnSchema(col.name, CATEGORICAL, levels))
        else:
            schema.append(col)
    return table.with_columns(schema, columns)


def discretize_table(
    table: DataTable, config: DiscretizerConfig = DiscretizerConfig()
) -> tuple[DataTable, dict[str, BinEdges]]:
    fits = fit_discretizer(table, config)
    bins = {k: f.bins for k, f in fits.items()}
    return apply_bins(table, bins), bins


def save_bins(path: str | Path, bins: dict[str, BinEdges]) -> None:
    payload = [b.to_json() for b in bins.values()]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_bins(path: str | Path) -> dict[str, BinEdges]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return {p["column"]: BinEdges.from_json(p) for p in payload}


def write_diagnostics(path: str | Path, fits: dict[str, ColumnFit]) -> None:
    """One CSV row per (column, alpha): leaves, decision nodes, CV accuracy."""
    fields = ["column", "depth", "alpha", "leaves", "decision_nodes", "cv_mean", "cv_std", "chosen"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for name, fit in fits.items():
            if fit.path is None:
                writer.writerow({"column": name, "depth": fit.depth, "chosen": 1})
                continue
            for row in fit.path.rows():
                writer.writerow(
                    {"column": name, "depth": fit.depth, **row, "chosen": int(row["alpha"] == fit.bins.chosen_alpha)}
                )


__all__ = [
    "BinEdges",
    "ColumnFit",
    "DiscretizerConfig",
    "apply_bins",
    "discretize_table",
    "extract_bins",
    "fit_column",
    "fit_discretizer",
    "load_bins",
    "save_bins",
    "write_diagnostics",
]
