"""Benchmark grid: configuration, execution, aggregation and reporting."""

from tabembed.bench.config import BASELINE, CONFIG_HELP, DEFAULT_ENCODERS, RunConfig, load_config, parse_config, worker_count
from tabembed.bench.pipeline import PreparedDataset, derive_seeds, encode, prepare
from tabembed.bench.runner import BenchmarkRecord, read_records, run
from tabembed.bench.summary import Cell, SummaryTable, report, summarize

__all__ = [
    "BASELINE",
    "CONFIG_HELP",
    "DEFAULT_ENCODERS",
    "BenchmarkRecord",
    "Cell",
    "PreparedDataset",
    "RunConfig",
    "SummaryTable",
    "derive_seeds",
    "encode",
    "load_config",
    "parse_config",
    "prepare",
    "read_records",
    "report",
    "run",
    "summarize",
    "worker_count",
]
