"""Single-feature classification tree grown by cross-entropy splits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from tabembed.errors import DegenerateTargetError


@dataclass
class TreeNode:
    """A node of a binary tree on one feature.

    Samples with ``x <= threshold`` go left, the rest go right.
    """

    level_counts: np.ndarray
    impurity: float
    threshold: float | None = None
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def n_samples(self) -> int:
        return int(self.level_counts.sum())

    @property
    def errors(self) -> int:
        """Resubstitution misclassification count if this node were a leaf."""
        return int(self.level_counts.sum() - self.level_counts.max())

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.level_counts))

    def nodes(self) -> Iterator[TreeNode]:
        yield self
        if not self.is_leaf:
            yield from self.left.nodes()
            yield from self.right.nodes()

    def leaves(self) -> Iterator[TreeNode]:
        return (n for n in self.nodes() if n.is_leaf)

    def decision_nodes(self) -> Iterator[TreeNode]:
        return (n for n in self.nodes() if not n.is_leaf)

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    @property
    def n_decision_nodes(self) -> int:
        return sum(1 for _ in self.decision_nodes())

    @property
    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth, self.right.depth)

    def in_order(self) -> tuple[list[float], list[TreeNode]]:
        """Thresholds and leaves from left to right.

        On a single feature the k sorted thresholds cut the line into k+1
        intervals, one per leaf, in the same left-to-right order.
        """
        if self.is_leaf:
            return [], [self]
        lt, ll = self.left.in_order()
        rt, rl = self.right.in_order()
        return lt + [self.threshold] + rt, ll + rl

    def predict(self, x: np.ndarray) -> np.ndarray:
        thresholds, leaves = self.in_order()
        classes = np.array([leaf.prediction for leaf in leaves], dtype=np.int64)
        return classes[np.searchsorted(np.asarray(thresholds, dtype=np.float64), x, side="left")]

    def copy(self) -> TreeNode:
        if self.is_leaf:
            return TreeNode(self.level_counts.copy(), self.impurity)
        return TreeNode(self.level_counts.copy(), self.impurity, self.threshold, self.left.copy(), self.right.copy())

    def collapsed(self) -> TreeNode:
        return TreeNode(self.level_counts.copy(), self.impurity)

    def structure(self) -> tuple:
        """Hashable shape of the tree, used to compare pruned subtrees."""
        if self.is_leaf:
            return ()
        return (self.threshold, self.left.structure(), self.right.structure())


def truncate(tree: TreeNode, max_depth: int) -> TreeNode:
    """Copy of ``tree`` with every node at ``max_depth`` turned into a leaf."""
    if tree.is_leaf or max_depth <= 0:
        return tree.collapsed()
    return TreeNode(
        tree.level_counts.copy(),
        tree.impurity,
        tree.threshold,
        truncate(tree.left, max_depth - 1),
        truncate(tree.right, max_depth - 1),
    )


def entropy_bits(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _xlogx(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = a[pos] * np.log2(a[pos])
    return out


def encode_labels(y) -> tuple[np.ndarray, np.ndarray]:
    levels, codes = np.unique(np.asarray(y), return_inverse=True)
    return levels, codes.astype(np.int64)


def grow_tree(x, y, max_depth: int, n_levels: int | None = None) -> TreeNode:
    """Grow a CART tree on one real feature.

    ``y`` may hold arbitrary labels, or integer codes when ``n_levels`` is
    given. Each split minimizes the weighted child entropy over midpoints of
    consecutive distinct sorted values; ties go to the smaller threshold.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != len(y):
        raise ValueError("x and y must be 1-D and of equal length")
    if n_levels is None:
        levels, codes = encode_labels(y)
        n_levels = len(levels)
    else:
        codes = np.asarray(y, dtype=np.int64)
    if len(np.unique(codes)) < 2:
        raise DegenerateTargetError("target has a single level; nothing to split")
    order = np.argsort(x, kind="stable")
    xs, cs = x[order], codes[order]
    onehot = np.zeros((len(xs), n_levels), dtype=np.int64)
    onehot[np.arange(len(xs)), cs] = 1
    cumulative = np.vstack([np.zeros((1, n_levels), dtype=np.int64), np.cumsum(onehot, axis=0)])
    return _grow(xs, cumulative, 0, len(xs), 0, max_depth)


def _grow(xs: np.ndarray, cum: np.ndarray, lo: int, hi: int, depth: int, max_depth: int) -> TreeNode:
    counts = cum[hi] - cum[lo]
    node = TreeNode(counts, entropy_bits(counts))
    n = hi - lo
    if depth >= max_depth or n < 2 or np.count_nonzero(counts) < 2:
        return node
    cut = _best_cut(xs, cum, lo, hi)
    if cut is None:
        return node
    a, b = xs[cut - 1], xs[cut]
    threshold = a + (b - a) / 2.0
    if not (a <= threshold < b):
        threshold = a
    node.threshold = float(threshold)
    node.left = _grow(xs, cum, lo, cut, depth + 1, max_depth)
    node.right = _grow(xs, cum, cut, hi, depth + 1, max_depth)
    return node


def _best_cut(xs: np.ndarray, cum: np.ndarray, lo: int, hi: int) -> int | None:
    candidates = lo + 1 + np.nonzero(xs[lo + 1 : hi] > xs[lo : hi - 1])[0]
    if len(candidates) == 0:
        return None
    left = cum[candidates] - cum[lo]
    right = cum[hi] - cum[candidates]
    n_left = left.sum(axis=1)
    n_right = right.sum(axis=1)
    # n * weighted child entropy, up to a constant: sum over children of n_c log n_c - sum_k c_k log c_k
    score = _xlogx(n_left) - _xlogx(left).sum(axis=1) + _xlogx(n_right) - _xlogx(right).sum(axis=1)
    best = score.min()
    tied = np.nonzero(score <= best + 1e-9 * max(1.0, abs(best)))[0]
    return int(candidates[tied[0]])
