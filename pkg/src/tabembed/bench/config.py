"""Run configuration and its INI-style file format."""

from __future__ import annotations

import configparser
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from tabembed.dataset import SplitSpec
from tabembed.discretizer import DiscretizerConfig
from tabembed.encoders import KINDS
from tabembed.errors import ConfigurationError

log = logging.getLogger(__name__)

BASELINE = "ordinal"
DEFAULT_ENCODERS = ("ordinal", "onehot", "rarelabel", "string_similarity", "summary", "target")
MODELS = ("entity", "context")
WORKERS_ENV = "TABEMBED_WORKERS"

CONFIG_HELP = """\
Config file (INI). Every key is optional; defaults shown.

  [run]
  datasets = adult, mushroom, bank, breast, german, spambase, car, cmc, nursery, scale
  encoders = ordinal, onehot, rarelabel, string_similarity, summary, target
  models = entity, context
  repetitions = 5
  master_seed = 0
  output_dir = results

  [split]
  train = 0.70
  validation = 0.15
  test = 0.15
  seed = 0

  [discretizer]
  max_depth = 7
  folds = 5
  seed = 0

The ordinal baseline is always added to the encoder list. Relative
output_dir paths resolve against the config file's directory.
"""


def _all_datasets() -> tuple[str, ...]:
    from tabembed.dataset import dataset_names

    return tuple(dataset_names())


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple[str, ...] = field(default_factory=_all_datasets)
    encoders: tuple[str, ...] = DEFAULT_ENCODERS
    models: tuple[str, ...] = MODELS
    repetitions: int = 5
    master_seed: int = 0
    split: SplitSpec = SplitSpec()
    discretizer: DiscretizerConfig = DiscretizerConfig()
    output_dir: Path = Path("results")

    def __post_init__(self) -> None:
        encoders = tuple(self.encoders)
        if BASELINE not in encoders:
            log.info("adding the %s baseline to the encoder list", BASELINE)
            encoders = (BASELINE,) + encoders
        for kind in encoders:
            if kind not in KINDS:
                raise ConfigurationError(f"unknown encoder {kind!r}; choose from {', '.join(KINDS)}")
        for model in self.models:
            if model not in MODELS:
                raise ConfigurationError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")
        if not self.datasets:
            raise ConfigurationError("no datasets configured")
        object.__setattr__(self, "encoders", encoders)
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    @property
    def n_cells(self) -> int:
        return len(self.datasets) * len(self.encoders) * len(self.models) * self.repetitions


def _list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.replace("\n", ",").split(",") if v.strip())


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    known = {"run", "split", "discretizer"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    kwargs: dict = {}
    try:
        if parser.has_section("run"):
            run = parser["run"]
            extra = set(run) - {"datasets", "encoders", "models", "repetitions", "master_seed", "output_dir"}
            if extra:
                raise ConfigurationError(f"unknown [run] keys: {sorted(extra)}")
            for key in ("datasets", "encoders", "models"):
                if key in run:
                    kwargs[key] = _list(run[key])
            if "repetitions" in run:
                kwargs["repetitions"] = run.getint("repetitions")
            if "master_seed" in run:
                kwargs["master_seed"] = run.getint("master_seed")
            if "output_dir" in run:
                out = Path(run["output_dir"])
                kwargs["output_dir"] = out if out.is_absolute() else Path(base_dir) / out
        if parser.has_section("split"):
            s = parser["split"]
            kwargs["split"] = SplitSpec(
                s.getfloat("train", 0.70), s.getfloat("validation", 0.15), s.getfloat("test", 0.15), s.getint("seed", 0)
            )
        if parser.has_section("discretizer"):
            d = parser["discretizer"]
            kwargs["discretizer"] = DiscretizerConfig(d.getint("max_depth", 7), d.getint("folds", 5), d.getint("seed", 0))
    except ValueError as exc:
        raise ConfigurationError(f"invalid config value: {exc}") from exc
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigurationError(f"{WORKERS_ENV} must be at least 1")
    return value
