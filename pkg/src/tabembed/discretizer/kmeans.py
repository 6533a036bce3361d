"""One-dimensional k-means binning (Lloyd iterations)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tabembed.discretizer.bins import BinEdges


@dataclass(frozen=True)
class KMeansResult:
    bins: BinEdges
    centroids: tuple[float, ...]
    objective: tuple[float, ...]
    iterations: int
    reseeded: int


def kmeans_bins(x, k: int, max_iter: int = 100, seed: int = 0, column: str = "") -> KMeansResult:
    """Cluster ``x`` into ``k`` groups and cut midway between adjacent centroids.

    Centroids start at ``k`` distinct values drawn with the seed. An empty
    cluster is moved onto the point farthest from its current centroid.
    ``objective`` holds the within-cluster sum of squares after each
    assignment step.
    """
    x = np.asarray(x, dtype=np.float64)
    x = x[~np.isnan(x)]
    distinct = np.unique(x)
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(distinct) < k:
        raise ValueError(f"need at least {k} distinct values, got {len(distinct)}")
    rng = np.random.default_rng(seed)
    centroids = np.sort(rng.choice(distinct, size=k, replace=False))
    assign = None
    objective: list[float] = []
    reseeded = 0
    it = 0
    for it in range(1, max_iter + 1):
        dist = np.abs(x[:, None] - centroids[None, :])
        new_assign = np.argmin(dist, axis=1)
        objective.append(float(((x - centroids[new_assign]) ** 2).sum()))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = x[assign == j]
            if len(members):
                centroids[j] = members.mean()
        for j in range(k):
            if not np.any(assign == j):
                far = int(np.argmax(np.abs(x - centroids[assign])))
                centroids[j] = x[far]
                assign[far] = j
                reseeded += 1
    centroids = np.sort(centroids)
    edges = tuple(float(v) for v in (centroids[:-1] + centroids[1:]) / 2.0)
    return KMeansResult(BinEdges(column, edges), tuple(centroids.tolist()), tuple(objective), it, reseeded)
