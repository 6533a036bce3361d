"""Aggregation of benchmark records and table rendering."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from tabembed.bench.config import BASELINE
from tabembed.bench.runner import OK, BenchmarkRecord

TIMING_PAIR = (BASELINE, "string_similarity")


@dataclass(frozen=True)
class Cell:
    dataset: str
    encoder: str
    model: str
    n_ok: int
    n_failed: int
    n_undefined: int
    f1_mean: float | None
    f1_std: float | None
    bce_mean: float | None
    bce_std: float | None
    seconds_mean: float | None
    better: bool = False

    @property
    def undefined(self) -> bool:
        return self.n_ok > 0 and self.n_undefined == self.n_ok

    @property
    def failed(self) -> bool:
        return self.n_ok == 0

    def f1_text(self) -> str:
        if self.failed:
            return "failed"
        if self.undefined:
            return "undefined"
        mark = "*" if self.better else ""
        return f"{mark}{self.f1_mean:.2f} ({self.f1_std:.2f})"

    def bce_text(self) -> str:
        if self.failed:
            return "failed"
        return f"{self.bce_mean:.3e}"


@dataclass(frozen=True)
class SummaryTable:
    cells: tuple[Cell, ...]

    def get(self, dataset: str, encoder: str, model: str) -> Cell | None:
        for c in self.cells:
            if (c.dataset, c.encoder, c.model) == (dataset, encoder, model):
                return c
        return None

    def axis(self, name: str) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.cells:
            seen.setdefault(getattr(c, name), None)
        return list(seen)


def _mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    a = np.asarray(values, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=0))


def summarize(records: Sequence[BenchmarkRecord]) -> SummaryTable:
    """Mean and population std per (dataset, encoder, model).

    F1 statistics use only repetitions where F1 is defined; failed
    repetitions are excluded everywhere. A cell is flagged ``better`` when
    its mean F1 strictly exceeds the ordinal baseline's on the same dataset
    and model.
    """
    groups: dict[tuple[str, str, str], list[BenchmarkRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.encoder, r.model), []).append(r)
    raw = {}
    for key, rs in groups.items():
        ok = [r for r in rs if r.status == OK]
        f1 = [r.f1 for r in ok if r.f1 is not None]
        f1_mean, f1_std = _mean_std(f1)
        bce_mean, bce_std = _mean_std([r.bce for r in ok])
        sec, _ = _mean_std([r.train_seconds for r in ok])
        raw[key] = Cell(*key, len(ok), len(rs) - len(ok), len(ok) - len(f1), f1_mean, f1_std, bce_mean, bce_std, sec)
    cells = []
    for (dataset, encoder, model), cell in raw.items():
        base = raw.get((dataset, BASELINE, model))
        better = (
            encoder != BASELINE
            and cell.f1_mean is not None
            and base is not None
            and base.f1_mean is not None
            and cell.f1_mean > base.f1_mean
        )
        cells.append(Cell(**{**cell.__dict__, "better": better}))
    return SummaryTable(tuple(cells))


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _write_long(path: Path, summary: SummaryTable, metric: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "model", "encoder", "mean", "std", "n_ok", "n_undefined", "n_failed", "status", "better"])
        for c in summary.cells:
            mean, std = (c.f1_mean, c.f1_std) if metric == "f1" else (c.bce_mean, c.bce_std)
            status = "failed" if c.failed else "undefined" if metric == "f1" and c.undefined else "ok"
            w.writerow([c.dataset, c.model, c.encoder, _fmt(mean), _fmt(std), c.n_ok, c.n_undefined, c.n_failed, status,
                        int(c.better) if metric == "f1" else ""])


def _grid_text(summary: SummaryTable, model: str, metric: str) -> list[list[str]]:
    encoders = summary.axis("encoder")
    rows = [["dataset"] + encoders]
    for dataset in summary.axis("dataset"):
        row = [dataset]
        for enc in encoders:
            c = summary.get(dataset, enc, model)
            row.append("" if c is None else c.f1_text() if metric == "f1" else c.bce_text())
        rows.append(row)
    return rows


def _render(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def timing_rows(summary: SummaryTable) -> list[list[str]]:
    rows = [["dataset", "model", "encoder", "mean_train_seconds"]]
    for model in summary.axis("model"):
        for dataset in summary.axis("dataset"):
            for enc in TIMING_PAIR:
                c = summary.get(dataset, enc, model)
                if c is not None:
                    rows.append([dataset, model, enc, _fmt(c.seconds_mean)])
    return rows


def report(summary: SummaryTable, directory: str | Path) -> list[Path]:
    """Write long-form CSVs, one wide CSV per (model, metric), timings and text tables."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in ("f1", "bce"):
        path = directory / f"summary_{metric}.csv"
        _write_long(path, summary, metric)
        written.append(path)
    text = []
    for model in summary.axis("model"):
        for metric in ("f1", "bce"):
            rows = _grid_text(summary, model, metric)
            path = directory / f"table_{metric}_{model}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
            written.append(path)
            title = "F1, mean (population std); * beats ordinal" if metric == "f1" else "test BCE, mean"
            text.append(f"[{model}] {title}\n{_render(rows)}\n")
    timing = timing_rows(summary)
    path = directory / "timings.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(timing)
    written.append(path)
    shown = [[r[0], r[1], r[2], r[3] if i == 0 else (f"{float(r[3]):.3f}" if r[3] else "n/a")] for i, r in enumerate(timing)]
    text.append(f"Training time, {TIMING_PAIR[0]} vs {TIMING_PAIR[1]} (seconds)\n{_render(shown)}\n")
    path = directory / "tables.txt"
    path.write_text("\n".join(text), encoding="utf-8")
    written.append(path)
    return written
