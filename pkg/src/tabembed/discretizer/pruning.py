"""Cost-complexity pruning, cross-validated alpha scoring and alpha selection.

Risk is the resubstitution error count divided by the number of samples at
the root, so ``alpha`` is a per-sample penalty per leaf. Dividing the count
form by a constant does not change which subtree is optimal, and the
normalized alpha transfers unchanged to trees grown on CV folds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from tabembed.discretizer.tree import TreeNode, encode_labels, grow_tree, truncate

STD_FLOOR = 1e-9


class DegenerateColumn(Exception):
    """The column cannot be discretized; treat it as a single category."""


class FoldSkippedWarning(UserWarning):
    pass


def prune(tree: TreeNode, alpha: float) -> TreeNode:
    """Smallest subtree minimizing error count / N + alpha * leaves.

    ``alpha == 0`` returns the unpruned tree. For ``alpha > 0``, a branch whose
    leaf cost ties its best subtree cost is collapsed.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0:
        return tree.copy()
    penalty = alpha * tree.n_samples
    pruned, _ = _prune(tree, penalty)
    return pruned


def _prune(node: TreeNode, penalty: float) -> tuple[TreeNode, float]:
    leaf_cost = node.errors + penalty
    if node.is_leaf:
        return node.collapsed(), leaf_cost
    left, lc = _prune(node.left, penalty)
    right, rc = _prune(node.right, penalty)
    branch_cost = lc + rc
    if leaf_cost <= branch_cost + 1e-9 * max(1.0, branch_cost):
        return node.collapsed(), leaf_cost
    return TreeNode(node.level_counts.copy(), node.impurity, node.threshold, left, right), branch_cost


def _subtree_stats(node: TreeNode, collapsed: set[int]) -> tuple[int, int]:
    """(leaf error total, leaf count) of the branch below ``node``."""
    if node.is_leaf or id(node) in collapsed:
        return node.errors, 1
    le, ll = _subtree_stats(node.left, collapsed)
    re, rl = _subtree_stats(node.right, collapsed)
    return le + re, ll + rl


def weakest_link_path(tree: TreeNode) -> tuple[list[Fraction], list[int]]:
    """Critical penalties in error-count units and the leaf count after each.

    The first entry is 0 with the unpruned tree. Each later entry is the
    smallest link strength ``(R(t) - R(T_t)) / (|T_t| - 1)`` of the current
    tree; all links at that strength are cut together. Strength-zero links are
    cut before the first positive entry. Arithmetic is exact.
    """
    collapsed: set[int] = set()
    penalties: list[Fraction] = [Fraction(0)]
    sizes = [tree.n_leaves]
    while not (tree.is_leaf or id(tree) in collapsed):
        strengths = []
        stack = [tree]
        while stack:
            node = stack.pop()
            if node.is_leaf or id(node) in collapsed:
                continue
            err, leaves = _subtree_stats(node, collapsed)
            strengths.append((Fraction(node.errors - err, leaves - 1), node))
            stack.extend([node.left, node.right])
        g = min(s for s, _ in strengths)
        for s, node in strengths:
            if s == g:
                collapsed.add(id(node))
        size = _subtree_stats(tree, collapsed)[1]
        if g == 0:
            continue
        penalties.append(g)
        sizes.append(size)
    return penalties, sizes


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold id per row; each level is shuffled and dealt round-robin."""
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    offset = 0
    for level in np.unique(y):
        rows = rng.permutation(np.nonzero(y == level)[0])
        fold_of[rows] = (np.arange(len(rows)) + offset) % folds
        offset += len(rows)
    return fold_of


@dataclass(frozen=True)
class PruningPath:
    alphas: tuple[float, ...]
    subtree_sizes: tuple[int, ...]
    decision_nodes: tuple[int, ...]
    cv_mean: tuple[float, ...]
    cv_std: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(b > a for a, b in zip(self.subtree_sizes, self.subtree_sizes[1:])):
            raise AssertionError("subtree sizes must be non-increasing along the path")

    def __len__(self) -> int:
        return len(self.alphas)

    def rows(self) -> list[dict]:
        return [
            {
                "alpha": a,
                "leaves": s,
                "decision_nodes": d,
                "cv_mean": m,
                "cv_std": sd,
            }
            for a, s, d, m, sd in zip(self.alphas, self.subtree_sizes, self.decision_nodes, self.cv_mean, self.cv_std)
        ]


def pruning_path(
    tree: TreeNode,
    x,
    y,
    folds: int = 5,
    max_depth: int | None = None,
    seed: int = 0,
) -> PruningPath:
    """Weakest-link path of ``tree`` scored by held-out accuracy over CV folds.

    For every fold a tree of the same depth is grown on the remaining rows,
    pruned at each alpha, and scored on the fold.
    """
    if tree.is_leaf:
        raise DegenerateColumn("tree has no decision node")
    if folds < 2:
        raise ValueError("need at least 2 folds")
    x = np.asarray(x, dtype=np.float64)
    levels, codes = encode_labels(y)
    depth = tree.depth if max_depth is None else max_depth
    penalties, sizes = weakest_link_path(tree)
    alphas = [float(p) / tree.n_samples for p in penalties]
    decision = [prune(tree, a).n_decision_nodes for a in alphas]
    scores = [[] for _ in alphas]
    fold_of = stratified_folds(codes, folds, seed)
    for f in range(folds):
        train, test = fold_of != f, fold_of == f
        if len(np.unique(codes[train])) < 2 or not test.any():
            warnings.warn(f"fold {f} has a single target level; skipped", FoldSkippedWarning, stacklevel=2)
            continue
        fold_tree = grow_tree(x[train], codes[train], depth, n_levels=len(levels))
        for i, a in enumerate(alphas):
            pred = prune(fold_tree, a).predict(x[test])
            scores[i].append(float(np.mean(pred == codes[test])))
    mean = tuple(float(np.mean(s)) if s else math.nan for s in scores)
    std = tuple(float(np.std(s)) if s else math.nan for s in scores)
    return PruningPath(tuple(alphas), tuple(sizes), tuple(decision), mean, std)


@dataclass(frozen=True)
class AlphaChoice:
    alpha: float
    index: int
    fallback: bool


def select_alpha(path: PruningPath) -> AlphaChoice:
    """Alpha with the best mean/std CV accuracy among trees keeping a split.

    Equal ratios go to the smaller alpha. If no scored alpha keeps a decision
    node the smallest scored alpha is returned with ``fallback`` set.
    """
    scored = [i for i in range(len(path)) if not math.isnan(path.cv_mean[i])]
    if not scored:
        raise DegenerateColumn("pruning path has no cross-validated alpha")
    candidates = [i for i in scored if path.decision_nodes[i] >= 1]
    if not candidates:
        i = min(scored, key=lambda j: path.alphas[j])
        return AlphaChoice(path.alphas[i], i, True)
    best, best_ratio = None, -math.inf
    for i in sorted(candidates, key=lambda j: path.alphas[j]):
        ratio = path.cv_mean[i] / max(path.cv_std[i], STD_FLOOR)
        if ratio > best_ratio:
            best, best_ratio = i, ratio
    return AlphaChoice(path.alphas[best], best, False)


def cv_depth_search(x, y, depths=range(1, 8), folds: int = 5, seed: int = 0) -> tuple[int, dict[int, float]]:
    """Depth with the best mean held-out accuracy of unpruned trees; ties go shallower."""
    x = np.asarray(x, dtype=np.float64)
    levels, codes = encode_labels(y)
    fold_of = stratified_folds(codes, folds, seed)
    per_depth: dict[int, list[float]] = {d: [] for d in depths}
    for f in range(folds):
        train, test = fold_of != f, fold_of == f
        if len(np.unique(codes[train])) < 2 or not test.any():
            warnings.warn(f"fold {f} has a single target level; skipped", FoldSkippedWarning, stacklevel=2)
            continue
        # Greedy splits do not depend on the depth limit, so one deep tree
        # truncated at each depth equals a tree grown with that limit.
        deep = grow_tree(x[train], codes[train], max(depths), n_levels=len(levels))
        for d in depths:
            t = truncate(deep, d)
            per_depth[d].append(float(np.mean(t.predict(x[test]) == codes[test])))
    means = {d: (float(np.mean(s)) if s else -math.inf) for d, s in per_depth.items()}
    best = max(depths, key=lambda d: (means[d], -d))
    return best, means
