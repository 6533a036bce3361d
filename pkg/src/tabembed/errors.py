"""Exception hierarchy shared by every subpackage."""

from __future__ import annotations


class TabEmbedError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TabEmbedError):
    def __init__(self, message: str, row_index: int | None = None) -> None:
        super().__init__(message if row_index is None else f"row {row_index}: {message}")
        self.row_index = row_index


class ConfigurationError(TabEmbedError):
    pass


class DegenerateTargetError(TabEmbedError):
    pass


class RegistryError(TabEmbedError):
    pass


class FetchError(TabEmbedError):
    pass


class IntegrityError(TabEmbedError):
    pass


class FitError(TabEmbedError):
    pass


class BuildError(TabEmbedError):
    pass


class TrainingAborted(TabEmbedError):
    """Raised when a loss turns non-finite during training."""

    def __init__(self, message: str, seed: int, epoch: int, batch_index: int) -> None:
        super().__init__(f"{message} (seed={seed}, epoch={epoch}, batch={batch_index})")
        self.seed = seed
        self.epoch = epoch
        self.batch_index = batch_index
