"""Entity-embedding and transformer ("context") classifiers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from tabembed.encoders.table import EncodedTable
from tabembed.errors import BuildError
from tabembed.nn import (
    DEFAULT_DTYPE,
    Dense,
    Dropout,
    EmbeddingBank,
    Flatten,
    LayerNorm,
    Module,
    MultiHeadAttention,
    ReLU,
    Residual,
    Sequential,
    Sigmoid,
)


def embedding_dim(c: int) -> int:
    """ceil(sqrt(c) * 1.6), computed exactly as the least d with 25 d^2 >= 64 c."""
    if c < 1:
        raise ValueError("category count must be at least 1")
    d = math.isqrt(64 * c // 25)
    while 25 * d * d < 64 * c:
        d += 1
    return d


def reduced_width(width: int, fraction: float) -> int:
    return max(1, int(math.floor(fraction * width)))


def seed_stream(seed: int, purpose: int) -> np.random.Generator:
    """Independent PCG64 stream per (seed, purpose): 0 init, 1 dropout, 2 shuffling."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), purpose]))


def mlp_layer(n_in: int, n_out: int, dropout: float, eps: float, init_rng, drop_rng, name: str, dtype) -> Sequential:
    """dense -> layer norm -> dropout -> ReLU."""
    return Sequential(
        Dense(n_in, n_out, init_rng, name=f"{name}.dense", dtype=dtype),
        LayerNorm(n_out, eps, name=f"{name}.norm", dtype=dtype),
        Dropout(dropout, drop_rng, name=f"{name}.dropout"),
        ReLU(),
        name=name,
    )


@dataclass(frozen=True)
class EntityConfig:
    vocab_sizes: tuple[int, ...]
    dims: tuple[int, ...]
    n_outputs: int
    mlp_repetitions: int = 2
    fractions: tuple[float, ...] = (0.5, 0.25)
    dropout: float = 0.1
    norm_eps: float = 1e-6
    epochs: int = 10
    batch_size: int = 256
    lr: float = 1e-3

    @property
    def concat_width(self) -> int:
        return sum(self.dims)

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(reduced_width(self.concat_width, f) for f in self.fractions[: self.mlp_repetitions])


@dataclass(frozen=True)
class ContextConfig:
    vocab_sizes: tuple[int, ...]
    n_outputs: int
    dim: int = 10
    heads: int = 4
    encoder_repetitions: int = 1
    mlp_repetitions: int = 1
    dropout: float = 0.1
    norm_eps: float = 1e-6
    epochs: int = 10
    batch_size: int = 128
    lr: float = 1e-3

    @property
    def sequence_length(self) -> int:
        return len(self.vocab_sizes)

    @property
    def flat_width(self) -> int:
        return self.sequence_length * self.dim


class Classifier(Module):
    """Embeddings -> body -> sigmoid outputs. Input is an index matrix."""

    kind = "classifier"

    def __init__(self, embed: EmbeddingBank, body: Sequential, config, seed: int) -> None:
        self.embed = embed
        self.body = body
        self.config = config
        self.seed = seed

    def children(self) -> Iterable[Module]:
        return (self.embed, self.body)

    def forward(self, indices):
        return self.body(self.embed(indices))

    def backward(self, grad):
        self.embed.backward(self.body.backward(grad))
        return None

    def dropout_layers(self) -> list[Dropout]:
        return [m for m in self.modules() if isinstance(m, Dropout)]

    def reset_dropout(self, seed: int) -> None:
        """Give every dropout layer the same fresh stream; used for repeatable masks."""
        rng = seed_stream(seed, 1)
        for d in self.dropout_layers():
            d.rng = rng

    def predict(self, indices: np.ndarray, batch_size: int = 4096) -> np.ndarray:
        was = self.training
        self.eval()
        out = [self(indices[i : i + batch_size]) for i in range(0, len(indices), batch_size)]
        self.train(was)
        n_out = self.body.layers[-2].n_out
        return np.concatenate(out, axis=0) if out else np.zeros((0, n_out))


class EntityModel(Classifier):
    kind = "entity"


class ContextModel(Classifier):
    kind = "context"


def _check_columns(vocab_sizes: Sequence[int]) -> None:
    if len(vocab_sizes) == 0:
        raise BuildError("the encoded table has no feature columns")


def entity_config(encoded: EncodedTable) -> EntityConfig:
    sizes = encoded.vocab_sizes
    _check_columns(sizes)
    return EntityConfig(tuple(sizes), tuple(embedding_dim(max(1, c)) for c in sizes), encoded.target.shape[1])


def build_entity_from_config(config: EntityConfig, seed: int = 0, dtype=DEFAULT_DTYPE) -> EntityModel:
    _check_columns(config.vocab_sizes)
    init, drop = seed_stream(seed, 0), seed_stream(seed, 1)
    embed = EmbeddingBank([c + 1 for c in config.vocab_sizes], config.dims, init, mode="concat", dtype=dtype)
    layers, width = [], config.concat_width
    for i, out in enumerate(config.hidden_widths):
        layers.append(mlp_layer(width, out, config.dropout, config.norm_eps, init, drop, f"mlp{i}", dtype))
        width = out
    layers.append(Dense(width, config.n_outputs, init, name="head", dtype=dtype))
    layers.append(Sigmoid())
    return EntityModel(embed, Sequential(*layers, name="body"), config, seed)


def build_entity(encoded: EncodedTable, seed: int = 0, dtype=DEFAULT_DTYPE, **overrides) -> EntityModel:
    config = entity_config(encoded)
    if overrides:
        config = EntityConfig(**{**config.__dict__, **overrides})
    return build_entity_from_config(config, seed, dtype)


def transformer_block(config: ContextConfig, init, drop, name: str, dtype) -> Sequential:
    """Attention, skip, norm, then feed-forward, skip, norm."""
    d = config.dim
    attention = MultiHeadAttention(d, config.heads, init, dropout=config.dropout, name=f"{name}.mha", dtype=dtype)
    feed_forward = mlp_layer(d, d, config.dropout, config.norm_eps, init, drop, f"{name}.ffn", dtype)
    # the attention block draws its dropout masks from the shared dropout stream
    attention.attn_dropout.rng = drop
    return Sequential(
        Residual(attention, name=f"{name}.attn_skip"),
        LayerNorm(d, config.norm_eps, name=f"{name}.norm1", dtype=dtype),
        Residual(feed_forward, name=f"{name}.ffn_skip"),
        LayerNorm(d, config.norm_eps, name=f"{name}.norm2", dtype=dtype),
        name=name,
    )


def context_config(encoded: EncodedTable, **overrides) -> ContextConfig:
    sizes = encoded.vocab_sizes
    _check_columns(sizes)
    return ContextConfig(tuple(sizes), encoded.target.shape[1], **overrides)


def build_context_from_config(config: ContextConfig, seed: int = 0, dtype=DEFAULT_DTYPE) -> ContextModel:
    _check_columns(config.vocab_sizes)
    init, drop = seed_stream(seed, 0), seed_stream(seed, 1)
    embed = EmbeddingBank(
        [c + 1 for c in config.vocab_sizes], [config.dim] * config.sequence_length, init, mode="stack", dtype=dtype
    )
    layers: list[Module] = [transformer_block(config, init, drop, f"encoder{i}", dtype) for i in range(config.encoder_repetitions)]
    layers.append(Flatten())
    width = config.flat_width
    for i in range(config.mlp_repetitions):
        layers.append(mlp_layer(width, width, config.dropout, config.norm_eps, init, drop, f"mlp{i}", dtype))
    layers.append(Dense(width, config.n_outputs, init, name="head", dtype=dtype))
    layers.append(Sigmoid())
    return ContextModel(embed, Sequential(*layers, name="body"), config, seed)


def build_context(encoded: EncodedTable, seed: int = 0, dtype=DEFAULT_DTYPE, **overrides) -> ContextModel:
    return build_context_from_config(context_config(encoded, **overrides), seed, dtype)


def build_model(kind: str, encoded: EncodedTable, seed: int = 0, dtype=DEFAULT_DTYPE) -> Classifier:
    if kind == "entity":
        return build_entity(encoded, seed, dtype)
    if kind == "context":
        return build_context(encoded, seed, dtype)
    raise BuildError(f"unknown model kind {kind!r}; choose entity or context")
