"""Target imbalance measured as one minus Shannon evenness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from tabembed.dataset.table import DataTable
from tabembed.errors import DegenerateTargetError


@dataclass(frozen=True)
class ImbalanceReport:
    evenness: float
    imbalance: float
    level_counts: dict[str, int]


def imbalance_from_counts(level_counts: Mapping[str, int]) -> ImbalanceReport:
    """Evenness is entropy of the level distribution over log(k).

    Only nonempty levels count toward k.
    """
    counts = {str(k): int(v) for k, v in level_counts.items() if int(v) > 0}
    k = len(counts)
    if k < 2:
        raise DegenerateTargetError(f"imbalance needs at least 2 nonempty levels, got {k}")
    n = sum(counts.values())
    entropy = -sum((c / n) * math.log(c / n) for c in counts.values())
    evenness = min(1.0, max(0.0, entropy / math.log(k)))
    return ImbalanceReport(evenness=evenness, imbalance=1.0 - evenness, level_counts=dict(sorted(counts.items())))


def shannon_imbalance(table: DataTable) -> ImbalanceReport:
    levels, counts = np.unique(table.target, return_counts=True)
    return imbalance_from_counts(dict(zip(levels.tolist(), counts.tolist())))
