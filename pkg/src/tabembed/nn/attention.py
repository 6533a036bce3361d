"""Multi-head scaled dot-product self-attention."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from tabembed.nn.core import DEFAULT_DTYPE, Module
from tabembed.nn.layers import Dense, Dropout


def softmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = scores - scores.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


class MultiHeadAttention(Module):
    """Self-attention over a [batch, length, dim] input.

    Each head projects to ``head_dim`` (default ceil(dim/heads)), so the model
    width need not divide evenly by the head count. Head outputs are joined
    and projected back to ``dim``. Dropout acts on the attention weights.
    """

    def __init__(
        self,
        dim: int,
        heads: int,
        rng: np.random.Generator,
        head_dim: int | None = None,
        dropout: float = 0.0,
        name: str = "mha",
        dtype=DEFAULT_DTYPE,
    ):
        self.name = name
        self.dim = dim
        self.heads = heads
        self.head_dim = head_dim if head_dim is not None else math.ceil(dim / heads)
        inner = self.heads * self.head_dim
        self.query = Dense(dim, inner, rng, name=f"{name}.query", dtype=dtype)
        self.key = Dense(dim, inner, rng, name=f"{name}.key", dtype=dtype)
        self.value = Dense(dim, inner, rng, name=f"{name}.value", dtype=dtype)
        self.output = Dense(inner, dim, rng, name=f"{name}.output", dtype=dtype)
        self.attn_dropout = Dropout(dropout, rng, name=f"{name}.dropout")

    def children(self) -> Iterable[Module]:
        return (self.query, self.key, self.value, self.attn_dropout, self.output)

    def _split(self, t: np.ndarray) -> np.ndarray:
        b, n, _ = t.shape
        return t.reshape(b, n, self.heads, self.head_dim).transpose(0, 2, 1, 3)

    def _merge(self, t: np.ndarray) -> np.ndarray:
        b, h, n, d = t.shape
        return t.transpose(0, 2, 1, 3).reshape(b, n, h * d)

    def forward(self, x):
        assert x.ndim == 3 and x.shape[1] > 0, "attention needs a [batch, length>0, dim] input"
        q = self._split(self.query.forward(x))
        k = self._split(self.key.forward(x))
        v = self._split(self.value.forward(x))
        scale = 1.0 / math.sqrt(self.head_dim)
        weights = softmax(q @ k.transpose(0, 1, 3, 2) * scale)
        dropped = self.attn_dropout.forward(weights)
        self._cache = (q, k, v, weights, dropped, scale)
        self.last_weights = weights
        return self.output.forward(self._merge(dropped @ v))

    def backward(self, grad):
        q, k, v, weights, dropped, scale = self._cache
        g_heads = self._split(self.output.backward(grad))
        g_dropped = g_heads @ v.transpose(0, 1, 3, 2)
        g_v = dropped.transpose(0, 1, 3, 2) @ g_heads
        g_weights = self.attn_dropout.backward(g_dropped)
        g_scores = weights * (g_weights - (g_weights * weights).sum(axis=-1, keepdims=True)) * scale
        g_q = g_scores @ k
        g_k = g_scores.transpose(0, 1, 3, 2) @ q
        gx = self.query.backward(self._merge(g_q))
        gx = gx + self.key.backward(self._merge(g_k))
        gx = gx + self.value.backward(self._merge(g_v))
        return gx


def multi_head_attention(x: np.ndarray, heads: int, rng: np.random.Generator, dropout: float = 0.0,
                         train: bool = False) -> np.ndarray:
    """Apply a freshly initialized attention block to ``x`` (shape [length, dim] or [batch, length, dim])."""
    squeeze = x.ndim == 2
    xb = x[None] if squeeze else x
    block = MultiHeadAttention(xb.shape[-1], heads, rng, dropout=dropout, dtype=x.dtype)
    block.train(train)
    out = block(xb)
    return out[0] if squeeze else out
