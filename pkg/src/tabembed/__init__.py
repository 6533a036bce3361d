"""Tabular preprocessing and embedding-model benchmark toolkit."""

__version__ = "0.1.0"
