"""Mini-batch training with Adam and binary cross-entropy."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from tabembed.encoders.table import EncodedSplits
from tabembed.errors import TrainingAborted
from tabembed.models.architectures import Classifier, seed_stream
from tabembed.models.metrics import f1_score
from tabembed.nn import Adam, bce_grad, bce_loss

log = logging.getLogger(__name__)


@dataclass
class TrainReport:
    model: str
    seed: int
    epochs: int
    batch_size: int
    n_parameters: int
    train_loss: list[float] = field(default_factory=list)
    validation_loss: list[float] = field(default_factory=list)
    test_bce: float | None = None
    test_f1: float | None = None
    test_micro_f1: float | None = None
    undefined_levels: list[int] = field(default_factory=list)
    train_seconds: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=1) + "\n", encoding="utf-8")
        lines = ["epoch,train_loss,validation_loss"]
        lines += [f"{i + 1},{a!r},{b!r}" for i, (a, b) in enumerate(zip(self.train_loss, self.validation_loss))]
        path.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _as(model: Classifier, y: np.ndarray) -> np.ndarray:
    dtype = model.parameters()[0].value.dtype
    return np.asarray(y, dtype=dtype)


def fit(
    model: Classifier,
    splits: EncodedSplits,
    seed: int = 0,
    epochs: int | None = None,
    batch_size: int | None = None,
    lr: float | None = None,
) -> TrainReport:
    """Train ``model`` on the train split and evaluate on test.

    Shuffling uses its own stream derived from ``seed``. ``train_seconds``
    covers the epoch loop only (including per-epoch validation loss), not
    encoding or model construction.
    """
    config = model.config
    epochs = config.epochs if epochs is None else epochs
    batch_size = config.batch_size if batch_size is None else batch_size
    lr = config.lr if lr is None else lr
    x_train, y_train = splits.train.indices(), _as(model, splits.train.target)
    x_val, y_val = splits.validation.indices(), splits.validation.target
    report = TrainReport(model.kind, seed, epochs, batch_size, model.n_parameters())
    optimizer = Adam(model.parameters(), lr=lr)
    shuffle = seed_stream(seed, 2)
    n = len(x_train)
    model.zero_grad()

    start = time.perf_counter()
    for epoch in range(epochs):
        model.train()
        order = shuffle.permutation(n)
        total = 0.0
        for b, lo in enumerate(range(0, n, batch_size)):
            batch = order[lo : lo + batch_size]
            try:
                prob = model(x_train[batch])
            except FloatingPointError as exc:
                raise TrainingAborted(str(exc), seed, epoch, b) from exc
            loss = bce_loss(prob, y_train[batch])
            if not np.isfinite(loss):
                raise TrainingAborted("non-finite loss", seed, epoch, b)
            model.backward(bce_grad(prob, y_train[batch]))
            optimizer.step()
            total += loss * len(batch)
        report.train_loss.append(total / max(n, 1))
        if len(x_val):
            report.validation_loss.append(bce_loss(model.predict(x_val), y_val))
        log.debug("epoch %d train %.5f", epoch + 1, report.train_loss[-1])
    report.train_seconds = time.perf_counter() - start

    evaluate(model, splits, report)
    return report


def evaluate(model: Classifier, splits: EncodedSplits, report: TrainReport) -> TrainReport:
    x_test, y_test = splits.test.indices(), splits.test.target
    prob = model.predict(x_test)
    report.test_bce = bce_loss(prob, y_test)
    result = f1_score(prob, y_test)
    report.test_f1 = result.value
    report.test_micro_f1 = result.micro
    report.undefined_levels = list(result.undefined_levels)
    return report
