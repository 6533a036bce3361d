"""A small reverse-mode neural network engine on numpy arrays."""

from tabembed.nn.attention import MultiHeadAttention, multi_head_attention, softmax
from tabembed.nn.checkpoint import load_checkpoint, save_checkpoint
from tabembed.nn.core import DEFAULT_DTYPE, Flatten, Module, Parameter, Residual, Sequential, check_finite
from tabembed.nn.gradcheck import GradCheckFailure, GradCheckReport, grad_check, relative_error
from tabembed.nn.layers import (
    Dense,
    Dropout,
    Embedding,
    EmbeddingBank,
    LayerNorm,
    ReLU,
    Sigmoid,
    dense,
    dropout,
    dropout_mask,
    embedding_lookup,
    glorot_uniform,
    layer_norm,
    relu,
    sigmoid,
)
from tabembed.nn.loss import bce_grad, bce_loss
from tabembed.nn.optim import Adam, AdamState, adam_step

__all__ = [
    "DEFAULT_DTYPE",
    "Adam",
    "AdamState",
    "Dense",
    "Dropout",
    "Embedding",
    "EmbeddingBank",
    "Flatten",
    "GradCheckFailure",
    "GradCheckReport",
    "LayerNorm",
    "Module",
    "MultiHeadAttention",
    "Parameter",
    "ReLU",
    "Residual",
    "Sequential",
    "Sigmoid",
    "adam_step",
    "bce_grad",
    "bce_loss",
    "check_finite",
    "dense",
    "dropout",
    "dropout_mask",
    "embedding_lookup",
    "glorot_uniform",
    "grad_check",
    "layer_norm",
    "load_checkpoint",
    "multi_head_attention",
    "relative_error",
    "relu",
    "save_checkpoint",
    "sigmoid",
    "softmax",
]
