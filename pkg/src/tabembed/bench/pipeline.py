"""Per-dataset preparation shared by every cell of the grid."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tabembed.dataset import DataTable, SplitIndices, SplitSpec, load_dataset, save_splits, split_indices
from tabembed.discretizer import BinEdges, ColumnFit, DiscretizerConfig, apply_bins, fit_discretizer
from tabembed.discretizer import save_bins, write_diagnostics
from tabembed.encoders import EncodedSplits, EncoderSpec, encode_table


@dataclass(frozen=True)
class PreparedDataset:
    """A dataset after one split and one discretization.

    Bins are fitted on the train split only and then applied to every row,
    so validation and test never inform the cut points.
    """

    name: str
    raw: DataTable
    indices: SplitIndices
    split_spec: SplitSpec
    fits: dict[str, ColumnFit]
    table: DataTable

    @property
    def bins(self) -> dict[str, BinEdges]:
        return {k: f.bins for k, f in self.fits.items()}

    def splits(self) -> tuple[DataTable, DataTable, DataTable]:
        return tuple(self.table.take(i) for i in self.indices.as_tuple())  # type: ignore[return-value]

    def save(self, directory: str | Path) -> Path:
        """Write split CSVs, split sidecar, bin edges and discretizer diagnostics."""
        directory = Path(directory)
        sidecar = save_splits(directory, self.table, self.indices, self.split_spec)
        save_bins(directory / "bins.json", self.bins)
        write_diagnostics(directory / "discretizer.csv", self.fits)
        return sidecar


def prepare(
    name: str,
    split_spec: SplitSpec = SplitSpec(),
    discretizer: DiscretizerConfig = DiscretizerConfig(),
    cache_dir: str | Path | None = None,
    table: DataTable | None = None,
) -> PreparedDataset:
    raw = table if table is not None else load_dataset(name, cache_dir)
    indices = split_indices(raw, split_spec)
    fits = fit_discretizer(raw.take(indices.train), discretizer)
    binned = apply_bins(raw, {k: f.bins for k, f in fits.items()})
    return PreparedDataset(name, raw, indices, split_spec, fits, binned)


def encode(prepared: PreparedDataset, encoder: str | EncoderSpec) -> EncodedSplits:
    spec = encoder if isinstance(encoder, EncoderSpec) else EncoderSpec(encoder)
    return encode_table(*prepared.splits(), spec)


def derive_seeds(master_seed: int, repetitions: int) -> list[int]:
    """Distinct 32-bit repetition seeds spawned from the master seed."""
    children = np.random.SeedSequence(int(master_seed)).spawn(repetitions)
    seeds = [int(c.generate_state(1)[0]) for c in children]
    while len(set(seeds)) < len(seeds):  # vanishingly unlikely; keep them distinct regardless
        seeds = [s if seeds.index(s) == i else (s + i) % 2**32 for i, s in enumerate(seeds)]
    return seeds


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
