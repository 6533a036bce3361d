"""Categorical encoders and whole-table encoding."""

from tabembed.encoders.core import (
    KINDS,
    RARE_TOKEN,
    TARGET_AWARE,
    EncoderSpec,
    FittedEncoder,
    digit_width,
    fit,
    summary_encode,
    target_encode_smoothed,
    target_values,
    transform,
)
from tabembed.encoders.jaro import jaro_similarity
from tabembed.encoders.table import Block, EncodedSplits, EncodedTable, encode_table, encode_target

__all__ = [
    "KINDS",
    "RARE_TOKEN",
    "TARGET_AWARE",
    "Block",
    "EncodedSplits",
    "EncodedTable",
    "EncoderSpec",
    "FittedEncoder",
    "digit_width",
    "encode_table",
    "encode_target",
    "fit",
    "jaro_similarity",
    "summary_encode",
    "target_encode_smoothed",
    "target_values",
    "transform",
]
