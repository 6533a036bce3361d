"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from tabembed.discretizer.tree import TreeNode


def random_tree(rng: np.random.Generator, max_nodes: int = 15, n_levels: int = 2) -> TreeNode:
    """A random full binary tree with at most ``max_nodes`` nodes and consistent counts."""
    n_internal = int(rng.integers(1, (max_nodes - 1) // 2 + 1))

    def build(k: int) -> TreeNode:
        if k == 0:
            counts = rng.integers(0, 12, size=n_levels)
            if counts.sum() == 0:
                counts[rng.integers(n_levels)] = 1
            return TreeNode(counts.astype(np.int64), 0.0)
        left_k = int(rng.integers(0, k))
        left, right = build(left_k), build(k - 1 - left_k)
        return TreeNode(left.level_counts + right.level_counts, 0.0, 0.0, left, right)

    tree = build(n_internal)
    # thresholds increase left to right, as on a real single-feature tree
    internal = []

    def walk(node):
        if node.is_leaf:
            return
        walk(node.left)
        internal.append(node)
        walk(node.right)

    walk(tree)
    for i, node in enumerate(internal):
        node.threshold = float(i + 1)
    return tree


def all_subtrees(node: TreeNode) -> list[tuple[int, int, tuple]]:
    """Every pruned subtree rooted at ``node`` as (errors, leaves, structure)."""
    options = [(node.errors, 1, ())]
    if not node.is_leaf:
        for le, ll, ls in all_subtrees(node.left):
            for re, rl, rs in all_subtrees(node.right):
                options.append((le + re, ll + rl, (node.threshold, ls, rs)))
    return options


def smallest_minimizer(subtrees, penalty: Fraction) -> tuple[int, int, tuple]:
    """Subtree minimizing errors + penalty * leaves; fewest leaves among ties."""
    return min(subtrees, key=lambda s: (s[0] + penalty * s[1], s[1]))


def envelope_path(tree: TreeNode) -> list[tuple[Fraction, int, tuple]]:
    """Breakpoints of the smallest cost-complexity minimizer as the penalty grows from 0+."""
    subtrees = all_subtrees(tree)
    current = min(subtrees, key=lambda s: (s[0], s[1]))
    path = []
    while current[1] > 1:
        best = None
        for e, l, s in subtrees:
            if l < current[1]:
                a = Fraction(e - current[0], current[1] - l)
                if best is None or a < best:
                    best = a
        current = smallest_minimizer(subtrees, best)
        path.append((best, current[1], current[2]))
    return path


def jaro_reference(s1: str, s2: str) -> float:
    """Jaro similarity evaluated from an explicit eligibility matrix with exact fractions.

    Cell (i, j) is eligible when the characters agree and |i - j| is within
    the window. Scanning rows in order and taking the first free eligible
    column reproduces the standard matching; the score is formed exactly.
    """
    if not s1 and not s2:
        return 1.0
    window = max(max(len(s1), len(s2)) // 2 - 1, 0)
    eligible = {(i, j) for i, j in itertools.product(range(len(s1)), range(len(s2)))
                if s1[i] == s2[j] and abs(i - j) <= window}
    pairs_ = []
    free = set(range(len(s2)))
    for i in range(len(s1)):
        options = sorted(j for j in free if (i, j) in eligible)
        if options:
            free.discard(options[0])
            pairs_.append((i, options[0]))
    m = len(pairs_)
    if m == 0:
        return 0.0
    a = [s1[i] for i, _ in pairs_]
    b = [s2[j] for j in sorted(j for _, j in pairs_)]
    t = Fraction(sum(x != y for x, y in zip(a, b)), 2)
    return float((Fraction(m, len(s1)) + Fraction(m, len(s2)) + (m - t) / m) / 3)


def high_precision_embedding_dim(c: int) -> int:
    """ceil(sqrt(c) * 1.6) with 60-digit decimal arithmetic."""
    from decimal import ROUND_CEILING, Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = 60
        value = Decimal(c).sqrt() * Decimal("1.6")
        return int(value.to_integral_value(rounding=ROUND_CEILING))


def shannon_imbalance_ref(counts, log=math.log) -> float:
    n = sum(counts)
    k = len([c for c in counts if c > 0])
    h = -sum(c / n * log(c / n) for c in counts if c > 0)
    return 1.0 - h / log(k)


def pairs(n: int):
    return itertools.combinations(range(n), 2)
