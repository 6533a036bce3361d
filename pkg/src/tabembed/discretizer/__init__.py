"""Supervised discretization of continuous columns with pruned decision trees."""

from tabembed.discretizer.bins import (
    BinEdges,
    ColumnFit,
    DiscretizerConfig,
    apply_bins,
    discretize_table,
    extract_bins,
    fit_column,
    fit_discretizer,
    load_bins,
    save_bins,
    write_diagnostics,
)
from tabembed.discretizer.kmeans import KMeansResult, kmeans_bins
from tabembed.discretizer.pruning import (
    AlphaChoice,
    DegenerateColumn,
    PruningPath,
    cv_depth_search,
    prune,
    pruning_path,
    select_alpha,
    stratified_folds,
    weakest_link_path,
)
from tabembed.discretizer.tree import TreeNode, entropy_bits, grow_tree, truncate

__all__ = [
    "AlphaChoice",
    "BinEdges",
    "ColumnFit",
    "DegenerateColumn",
    "DiscretizerConfig",
    "KMeansResult",
    "PruningPath",
    "TreeNode",
    "apply_bins",
    "cv_depth_search",
    "discretize_table",
    "entropy_bits",
    "extract_bins",
    "fit_column",
    "fit_discretizer",
    "grow_tree",
    "kmeans_bins",
    "load_bins",
    "prune",
    "pruning_path",
    "save_bins",
    "select_alpha",
    "stratified_folds",
    "truncate",
    "weakest_link_path",
]
