"""Grid execution with incremental, resumable record persistence."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from tabembed.bench.config import RunConfig, worker_count
from tabembed.bench.pipeline import derive_seeds, digest, encode, prepare
from tabembed.encoders import EncodedSplits
from tabembed.errors import ConfigurationError, TabEmbedError
from tabembed.models import build_model, fit

log = logging.getLogger(__name__)

RECORDS = "records.jsonl"
OK = "ok"
FAILED = "failed"


@dataclass(frozen=True)
class BenchmarkRecord:
    dataset: str
    encoder: str
    model: str
    repetition: int
    seed: int
    f1: float | None
    bce: float | None
    train_seconds: float | None
    status: str = OK
    error: str | None = None

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.dataset, self.encoder, self.model, self.repetition)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> BenchmarkRecord:
        return cls(**json.loads(line))


def read_records(path: str | Path) -> list[BenchmarkRecord]:
    path = Path(path)
    if path.is_dir():
        path = path / RECORDS
    if not path.exists():
        return []
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(BenchmarkRecord.from_json(line))
    return out


def _failed(dataset: str, encoder: str, model: str, rep: int, seed: int, error: str) -> BenchmarkRecord:
    return BenchmarkRecord(dataset, encoder, model, rep, seed, None, None, None, FAILED, error)


@dataclass(frozen=True)
class _Cell:
    dataset: str
    encoder: str
    model: str
    repetition: int
    seed: int
    splits: EncodedSplits


def train_cell(cell: _Cell) -> BenchmarkRecord:
    try:
        model = build_model(cell.model, cell.splits.train, seed=cell.seed)
        report = fit(model, cell.splits, seed=cell.seed)
    except (TabEmbedError, FloatingPointError, ValueError) as exc:
        log.warning("cell %s/%s/%s rep %d failed: %s", cell.dataset, cell.encoder, cell.model, cell.repetition, exc)
        return _failed(cell.dataset, cell.encoder, cell.model, cell.repetition, cell.seed, f"{type(exc).__name__}: {exc}")
    return BenchmarkRecord(
        cell.dataset, cell.encoder, cell.model, cell.repetition, cell.seed, report.test_f1, report.test_bce, report.train_seconds
    )


def _write_prepared(prepared, directory: Path) -> None:
    """Persist splits and bins; refuse to continue if an earlier run split differently."""
    sidecar = directory / "split.json"
    before = digest(sidecar) if sidecar.exists() else None
    prepared.save(directory)
    if before is not None and before != digest(sidecar):
        raise ConfigurationError(f"{sidecar} changed; the output directory belongs to a different configuration")


def _cells(config: RunConfig, done: set, cache_dir) -> Iterator[BenchmarkRecord | _Cell]:
    """Yield pending cells in grid order, or failed records where preparation broke."""
    seeds = derive_seeds(config.master_seed, config.repetitions)
    for dataset in config.datasets:
        pending = [
            (enc, model, rep)
            for enc in config.encoders
            for model in config.models
            for rep in range(config.repetitions)
            if (dataset, enc, model, rep) not in done
        ]
        if not pending:
            continue
        try:
            prepared = prepare(dataset, config.split, config.discretizer, cache_dir)
            _write_prepared(prepared, config.output_dir / dataset)
        except ConfigurationError:
            raise
        except TabEmbedError as exc:
            log.warning("dataset %s unavailable: %s", dataset, exc)
            for enc, model, rep in pending:
                yield _failed(dataset, enc, model, rep, seeds[rep], f"{type(exc).__name__}: {exc}")
            continue
        encoded: dict[str, EncodedSplits | str] = {}
        for enc, model, rep in pending:
            if enc not in encoded:
                try:
                    encoded[enc] = encode(prepared, enc)
                    encoded[enc].save_encoders(config.output_dir / dataset / f"encoders_{enc}.json")
                except (TabEmbedError, ValueError) as exc:
                    encoded[enc] = f"{type(exc).__name__}: {exc}"
            splits = encoded[enc]
            if isinstance(splits, str):
                yield _failed(dataset, enc, model, rep, seeds[rep], splits)
            else:
                yield _Cell(dataset, enc, model, rep, seeds[rep], splits)


def _execute(items: Iterable[BenchmarkRecord | _Cell], workers: int) -> Iterator[BenchmarkRecord]:
    if workers <= 1:
        for item in items:
            yield item if isinstance(item, BenchmarkRecord) else train_cell(item)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = []
        for item in items:
            futures.append(item if isinstance(item, BenchmarkRecord) else pool.submit(train_cell, item))
        # results are consumed in grid order so the record file does not depend on scheduling
        for f in futures:
            yield f if isinstance(f, BenchmarkRecord) else f.result()


def run(config: RunConfig, workers: int | None = None, cache_dir=None) -> list[BenchmarkRecord]:
    """Run every missing cell of the grid and return all records for the configuration.

    Records already present in ``records.jsonl`` (finished or failed) are not
    rerun. New records are appended one line at a time by this process only.
    """
    workers = worker_count() if workers is None else workers
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    path = out / RECORDS
    existing = read_records(path)
    done = {r.key for r in existing}
    log.info("%d of %d cells already recorded", len(done), config.n_cells)
    with open(path, "a", encoding="utf-8") as fh:
        for record in _execute(_cells(config, done, cache_dir), workers):
            fh.write(record.to_json() + "\n")
            fh.flush()
            existing.append(record)
            log.info("%s/%s/%s rep %d: %s", *record.key, record.status)
    wanted = set(config.datasets), set(config.encoders), set(config.models)
    return [
        r
        for r in existing
        if r.dataset in wanted[0] and r.encoder in wanted[1] and r.model in wanted[2] and r.repetition < config.repetitions
    ]
