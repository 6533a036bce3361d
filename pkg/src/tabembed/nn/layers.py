"""Embedding, dense, activation, dropout and normalization layers."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from tabembed.nn.core import DEFAULT_DTYPE, Module, Parameter


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, dtype=DEFAULT_DTYPE) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def embedding_lookup(table: np.ndarray, indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices)
    assert np.issubdtype(indices.dtype, np.integer), "embedding indices must be integers"
    assert indices.size == 0 or (indices.min() >= 0 and indices.max() < table.shape[0]), (
        f"embedding index out of range [0, {table.shape[0]})"
    )
    return table[indices]


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    assert x.shape[-1] == w.shape[0] and w.shape[1] == b.shape[0], "dense shape mismatch"
    return x @ w + b


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def dropout_mask(shape, rate: float, rng: np.random.Generator, dtype) -> np.ndarray:
    """Kept units scaled by 1/(1-rate), dropped units zero."""
    if rate <= 0.0:
        return np.ones(shape, dtype=dtype)
    keep = rng.random(shape) >= rate
    return (keep / (1.0 - rate)).astype(dtype)


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator, train: bool) -> np.ndarray:
    if not train or rate <= 0.0:
        return x
    return x * dropout_mask(x.shape, rate, rng, x.dtype)


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * gamma + beta


class Embedding(Module):
    def __init__(self, vocab_size: int, dim: int, rng: np.random.Generator, name: str = "", dtype=DEFAULT_DTYPE):
        self.name = name
        self.table = Parameter(f"{name}.table", rng.uniform(-0.05, 0.05, size=(vocab_size, dim)).astype(dtype))

    def own_parameters(self) -> list[Parameter]:
        return [self.table]

    def forward(self, indices):
        self._indices = np.asarray(indices)
        return embedding_lookup(self.table.value, self._indices)

    def backward(self, grad):
        np.add.at(self.table.grad, self._indices, grad)
        return None


class EmbeddingBank(Module):
    """One embedding table per input column.

    Input is an integer matrix [batch, columns]. ``mode="concat"`` joins the
    looked-up vectors into [batch, sum(dims)]; ``mode="stack"`` requires equal
    dims and returns [batch, columns, dim].
    """

    def __init__(
        self,
        vocab_sizes: Sequence[int],
        dims: Sequence[int],
        rng: np.random.Generator,
        mode: str = "concat",
        dtype=DEFAULT_DTYPE,
        name: str = "embed",
    ):
        if len(vocab_sizes) != len(dims) or not vocab_sizes:
            raise ValueError("need one dim per column and at least one column")
        if mode not in ("concat", "stack"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "stack" and len(set(dims)) != 1:
            raise ValueError("stacking requires a shared embedding dim")
        self.mode = mode
        self.name = name
        self.dims = tuple(int(d) for d in dims)
        self.embeddings = [
            Embedding(int(v), int(d), rng, name=f"{name}.{j}", dtype=dtype)
            for j, (v, d) in enumerate(zip(vocab_sizes, dims))
        ]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)])

    def children(self) -> Iterable[Module]:
        return self.embeddings

    @property
    def output_width(self) -> int:
        return int(self.offsets[-1])

    def forward(self, indices):
        indices = np.asarray(indices)
        assert indices.ndim == 2 and indices.shape[1] == len(self.embeddings), "index matrix shape mismatch"
        parts = [emb.forward(indices[:, j]) for j, emb in enumerate(self.embeddings)]
        if self.mode == "concat":
            return np.concatenate(parts, axis=1)
        return np.stack(parts, axis=1)

    def backward(self, grad):
        for j, emb in enumerate(self.embeddings):
            if self.mode == "concat":
                emb.backward(grad[:, self.offsets[j] : self.offsets[j + 1]])
            else:
                emb.backward(grad[:, j, :])
        return None


class Dense(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, name: str = "", dtype=DEFAULT_DTYPE):
        self.name = name
        self.w = Parameter(f"{name}.w", glorot_uniform(rng, n_in, n_out, dtype))
        self.b = Parameter(f"{name}.b", np.zeros(n_out, dtype=dtype))

    @property
    def n_in(self) -> int:
        return self.w.value.shape[0]

    @property
    def n_out(self) -> int:
        return self.w.value.shape[1]

    def own_parameters(self) -> list[Parameter]:
        return [self.w, self.b]

    def forward(self, x):
        self._x = x
        return dense(x, self.w.value, self.b.value)

    def backward(self, grad):
        x2 = self._x.reshape(-1, self.n_in)
        g2 = grad.reshape(-1, self.n_out)
        self.w.grad += x2.T @ g2
        self.b.grad += g2.sum(axis=0)
        return grad @ self.w.value.T


class ReLU(Module):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0).astype(x.dtype, copy=False)

    def backward(self, grad):
        return grad * self._mask


class Sigmoid(Module):
    def forward(self, x):
        self._out = sigmoid(x)
        return self._out

    def backward(self, grad):
        return grad * self._out * (1.0 - self._out)


class Dropout(Module):
    """Inverted dropout; the exact identity when not training."""

    def __init__(self, rate: float, rng: np.random.Generator, name: str = ""):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate
        self.rng = rng
        self.name = name

    def forward(self, x):
        if not self.training or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = dropout_mask(x.shape, self.rate, self.rng, x.dtype)
        return x * self._mask

    def backward(self, grad):
        return grad if self._mask is None else grad * self._mask


class LayerNorm(Module):
    """Normalize over the last axis, then scale by gamma and shift by beta."""

    def __init__(self, dim: int, eps: float = 1e-6, name: str = "", dtype=DEFAULT_DTYPE):
        self.name = name
        self.eps = eps
        self.gamma = Parameter(f"{name}.gamma", np.ones(dim, dtype=dtype))
        self.beta = Parameter(f"{name}.beta", np.zeros(dim, dtype=dtype))

    def own_parameters(self) -> list[Parameter]:
        return [self.gamma, self.beta]

    def forward(self, x):
        mu = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        self._inv = 1.0 / np.sqrt(var + self.eps)
        self._xhat = (x - mu) * self._inv
        return self._xhat * self.gamma.value + self.beta.value

    def backward(self, grad):
        d = grad.shape[-1]
        self.gamma.grad += (grad * self._xhat).reshape(-1, d).sum(axis=0)
        self.beta.grad += grad.reshape(-1, d).sum(axis=0)
        gx = grad * self.gamma.value
        return self._inv * (
            gx - gx.mean(axis=-1, keepdims=True) - self._xhat * (gx * self._xhat).mean(axis=-1, keepdims=True)
        )
