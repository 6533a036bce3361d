"""Seeded, stratified train/validation/test partitioning."""

from __future__ import annotations

import json
import math
import warnings
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tabembed.dataset.table import DataTable

SPLIT_NAMES = ("train", "validation", "test")
MIN_LEVEL_SIZE = 3


class StratificationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    validation_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self) -> None:
        fr = self.fractions
        if any(f < 0 for f in fr) or not math.isclose(sum(fr), 1.0, abs_tol=1e-9):
            raise ValueError(f"split fractions must be non-negative and sum to 1, got {fr}")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.validation_fraction, self.test_fraction)


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def as_tuple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.train, self.validation, self.test)


def largest_remainder(total: int, fractions: tuple[float, ...]) -> list[int]:
    """Integer apportionment of ``total`` by fractions; ties go to earlier parts."""
    quotas = [total * f for f in fractions]
    counts = [math.floor(q + 1e-9) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda j: (-(quotas[j] - counts[j]), j))
    for j in order[: total - sum(counts)]:
        counts[j] += 1
    return counts


def _augment(capacity: dict, source, sink, order: dict) -> bool:
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in order[u]:
            if v not in parent and capacity[(u, v)] > 0:
                parent[v] = u
                if v == sink:
                    while parent[v] is not None:
                        p = parent[v]
                        capacity[(p, v)] -= 1
                        capacity[(v, p)] += 1
                        v = p
                    return True
                queue.append(v)
    return False


def allocate(level_sizes: list[int], fractions: tuple[float, ...]) -> np.ndarray:
    """Per-level split counts.

    Every cell is the floor or ceiling of its exact quota, each row sums to its
    level size, and column totals equal the largest-remainder apportionment of
    the grand total. The extra units are routed with a small max-flow.
    """
    sizes = np.asarray(level_sizes, dtype=np.int64)
    n_levels, n_parts = len(sizes), len(fractions)
    quotas = sizes[:, None] * np.asarray(fractions, dtype=np.float64)[None, :]
    base = np.floor(quotas + 1e-9).astype(np.int64)
    if n_levels == 0:
        return base
    remainder = quotas - base
    targets = np.asarray(largest_remainder(int(sizes.sum()), tuple(fractions)))
    need_row = sizes - base.sum(axis=1)
    need_col = targets - base.sum(axis=0)
    if (need_col < 0).any():
        need_col = np.maximum(need_col, 0)

    source, sink = "s", "t"
    rows = [("l", i) for i in range(n_levels)]
    cols = [("p", j) for j in range(n_parts)]
    capacity: dict = {}
    order: dict = {source: [], sink: []}
    for node in rows + cols:
        order[node] = []

    def edge(u, v, cap):
        capacity[(u, v)] = capacity.get((u, v), 0) + cap
        capacity.setdefault((v, u), 0)
        if v not in order[u]:
            order[u].append(v)
        if u not in order[v]:
            order[v].append(u)

    for i, r in enumerate(rows):
        edge(source, r, int(need_row[i]))
        for j in sorted(range(n_parts), key=lambda j: (-remainder[i, j], j)):
            if remainder[i, j] > 1e-9:
                edge(r, cols[j], 1)
    for j, c in enumerate(cols):
        edge(c, sink, int(need_col[j]))

    while _augment(capacity, source, sink, order):
        pass

    result = base.copy()
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            if remainder[i, j] > 1e-9 and capacity[(r, c)] == 0:
                result[i, j] += 1
    short = sizes - result.sum(axis=1)
    # Unreachable when the flow saturates; fall back to per-level rounding.
    for i in np.nonzero(short)[0]:
        result[i] = largest_remainder(int(sizes[i]), tuple(fractions))
    return result


def split_indices(table: DataTable, spec: SplitSpec = SplitSpec()) -> SplitIndices:
    y = table.target
    levels = sorted(set(y.tolist()))
    rng = np.random.default_rng(spec.seed)
    parts: list[list[np.ndarray]] = [[], [], []]
    eligible = []
    for level in levels:
        rows = np.nonzero(y == level)[0]
        if len(rows) < MIN_LEVEL_SIZE:
            warnings.warn(
                f"target level {level!r} has {len(rows)} sample(s); placed in train",
                StratificationWarning,
                stacklevel=2,
            )
            parts[0].append(rows)
        else:
            eligible.append(rows)
    counts = allocate([len(r) for r in eligible], spec.fractions)
    for rows, c in zip(eligible, counts):
        shuffled = rng.permutation(rows)
        bounds = np.cumsum(c)
        parts[0].append(shuffled[: bounds[0]])
        parts[1].append(shuffled[bounds[0] : bounds[1]])
        parts[2].append(shuffled[bounds[1] :])
    out = [np.sort(np.concatenate(p)) if p else np.zeros(0, dtype=np.int64) for p in parts]
    return SplitIndices(*[o.astype(np.int64) for o in out])


def split(table: DataTable, spec: SplitSpec = SplitSpec()) -> tuple[DataTable, DataTable, DataTable]:
    idx = split_indices(table, spec)
    return tuple(table.take(i) for i in idx.as_tuple())  # type: ignore[return-value]


def save_splits(directory: str | Path, table: DataTable, indices: SplitIndices, spec: SplitSpec) -> Path:
    """Write train/validation/test CSVs and a JSON sidecar; returns the sidecar path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, idx in zip(SPLIT_NAMES, indices.as_tuple()):
        table.take(idx).to_csv(directory / f"{name}.csv")
    sidecar = directory / "split.json"
    payload = {
        "seed": spec.seed,
        "fractions": dict(zip(SPLIT_NAMES, spec.fractions)),
        "n_rows": table.n_rows,
        "indices": {name: idx.tolist() for name, idx in zip(SPLIT_NAMES, indices.as_tuple())},
    }
    sidecar.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def load_split_indices(sidecar: str | Path) -> tuple[SplitIndices, SplitSpec]:
    payload = json.loads(Path(sidecar).read_text(encoding="utf-8"))
    fr = payload["fractions"]
    spec = SplitSpec(fr["train"], fr["validation"], fr["test"], seed=int(payload["seed"]))
    idx = SplitIndices(*[np.asarray(payload["indices"][n], dtype=np.int64) for n in SPLIT_NAMES])
    return idx, spec
