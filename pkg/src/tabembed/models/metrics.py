"""F1 scores with an explicit undefined state."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class F1Result:
    """``value`` is None when the score is undefined (no true positives)."""

    value: float | None
    undefined_levels: tuple[int, ...] = field(default=())
    micro: float | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


def _f1(tp: int, fp: int, fn: int) -> float | None:
    if tp == 0:
        return None
    return 2.0 * tp / (2.0 * tp + fp + fn)


def binary_f1(prob: np.ndarray, y: np.ndarray, threshold: float = 0.5) -> F1Result:
    pred = np.asarray(prob).reshape(-1) >= threshold
    truth = np.asarray(y).reshape(-1) >= 0.5
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    value = _f1(tp, fp, fn)
    return F1Result(value, () if value is not None else (0,), micro=float(np.mean(pred == truth)) if len(pred) else None)


def macro_f1(prob: np.ndarray, y: np.ndarray) -> F1Result:
    """Argmax prediction; levels with no true positives contribute 0 and are reported."""
    prob, y = np.asarray(prob), np.asarray(y)
    pred = prob.argmax(axis=1)
    truth = y.argmax(axis=1)
    scores, undefined = [], []
    for level in range(y.shape[1]):
        p, t = pred == level, truth == level
        s = _f1(int(np.sum(p & t)), int(np.sum(p & ~t)), int(np.sum(~p & t)))
        if s is None:
            undefined.append(level)
            s = 0.0
        scores.append(s)
    if undefined:
        log.info("F1 undefined for levels %s; counted as 0 in the macro average", undefined)
    micro = float(np.mean(pred == truth)) if len(pred) else None
    return F1Result(float(np.mean(scores)), tuple(undefined), micro)


def f1_score(prob: np.ndarray, y: np.ndarray) -> F1Result:
    y = np.asarray(y)
    if y.ndim == 1 or y.shape[1] == 1:
        return binary_f1(prob, y)
    return macro_f1(prob, y)
