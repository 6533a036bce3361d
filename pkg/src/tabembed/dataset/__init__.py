"""Dataset ingestion, imbalance measurement and stratified splits."""

from tabembed.dataset.fetch import dataset_names, fetch_dataset, load_dataset, registry
from tabembed.dataset.imbalance import ImbalanceReport, imbalance_from_counts, shannon_imbalance
from tabembed.dataset.splitting import (
    SplitIndices,
    SplitSpec,
    StratificationWarning,
    load_split_indices,
    save_splits,
    split,
    split_indices,
)
from tabembed.dataset.table import (
    CATEGORICAL,
    CONTINUOUS,
    MISSING_TOKEN,
    TARGET,
    ColumnSchema,
    DataTable,
    load_csv,
    table_from_rows,
)

__all__ = [
    "CATEGORICAL",
    "CONTINUOUS",
    "MISSING_TOKEN",
    "TARGET",
    "ColumnSchema",
    "DataTable",
    "ImbalanceReport",
    "SplitIndices",
    "SplitSpec",
    "StratificationWarning",
    "dataset_names",
    "fetch_dataset",
    "imbalance_from_counts",
    "load_csv",
    "load_dataset",
    "load_split_indices",
    "registry",
    "save_splits",
    "shannon_imbalance",
    "split",
    "split_indices",
    "table_from_rows",
]
