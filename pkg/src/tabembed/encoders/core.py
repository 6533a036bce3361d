"""Per-column categorical encoders: fit on train levels, transform anything."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tabembed.encoders.jaro import jaro_similarity
from tabembed.errors import ConfigurationError, FitError

log = logging.getLogger(__name__)

KINDS = (
    "label",
    "ordinal",
    "rarelabel",
    "onehot",
    "binary",
    "basen",
    "frequency",
    "target",
    "summary",
    "string_similarity",
)
TARGET_AWARE = ("target", "summary")
RARE_TOKEN = "__rare__"
UNKNOWN_INDEX = -1.0


@dataclass(frozen=True)
class EncoderSpec:
    kind: str
    t: float = 0.05
    n: int = 3
    m: float = 1.0
    p: float = 0.5
    alpha_q: float = 1.0
    quantiles: tuple[float, ...] | None = None
    winkler: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown encoder kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not 0.0 <= self.t <= 1.0:
            raise ConfigurationError("rare threshold t must lie in [0, 1]")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError("base n must be an integer >= 2")
        if not self.m > 0:
            raise ConfigurationError("smoothing mass m must be positive")
        if not self.alpha_q > 0:
            raise ConfigurationError("quantile regularization alpha_q must be positive")
        for q in self.quantile_list:
            if not 0.0 < q < 1.0:
                raise ConfigurationError("quantiles must lie in (0, 1)")

    @property
    def quantile_list(self) -> tuple[float, ...]:
        return tuple(self.quantiles) if self.quantiles else (self.p,)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "t": self.t,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "alpha_q": self.alpha_q,
            "quantiles": list(self.quantiles) if self.quantiles else None,
            "winkler": self.winkler,
        }

    @classmethod
    def from_json(cls, payload: dict) -> EncoderSpec:
        q = payload.get("quantiles")
        return cls(
            kind=payload["kind"],
            t=payload["t"],
            n=payload["n"],
            m=payload["m"],
            p=payload["p"],
            alpha_q=payload["alpha_q"],
            quantiles=tuple(q) if q else None,
            winkler=payload["winkler"],
        )


@dataclass(frozen=True)
class FittedEncoder:
    """Learned level -> vector mapping for one column.

    ``vocabulary`` indexes the train levels in lexicographic order.
    ``unknown`` is the row emitted for levels not seen during fit, except for
    string similarity, which scores unseen strings directly.
    """

    spec: EncoderSpec
    column: str
    vocabulary: dict[str, int]
    mapping: dict[str, tuple[float, ...]]
    unknown: tuple[float, ...]
    output_names: tuple[str, ...]
    collisions: tuple[tuple[str, ...], ...] = field(default=())

    @property
    def output_arity(self) -> int:
        return len(self.output_names)

    @property
    def levels(self) -> list[str]:
        return sorted(self.vocabulary, key=self.vocabulary.__getitem__)

    def row(self, value: str) -> tuple[float, ...]:
        hit = self.mapping.get(value)
        if hit is not None:
            return hit
        if self.spec.kind == "string_similarity":
            return tuple(jaro_similarity(value, lvl, winkler=self.spec.winkler) for lvl in self.levels)
        return self.unknown

    def transform(self, x: Sequence[str]) -> np.ndarray:
        x = np.asarray(x, dtype=str)
        uniq, inverse = np.unique(x, return_inverse=True)
        rows = np.array([self.row(u) for u in uniq.tolist()], dtype=np.float64).reshape(len(uniq), self.output_arity)
        return rows[inverse.reshape(-1)]

    def to_json(self) -> dict:
        return {
            "column": self.column,
            "spec": self.spec.to_json(),
            "vocabulary": self.vocabulary,
            "mapping": {k: list(v) for k, v in self.mapping.items()},
            "unknown": list(self.unknown),
            "output_names": list(self.output_names),
            "collisions": [list(c) for c in self.collisions],
        }

    @classmethod
    def from_json(cls, payload: dict) -> FittedEncoder:
        return cls(
            spec=EncoderSpec.from_json(payload["spec"]),
            column=payload["column"],
            vocabulary={k: int(v) for k, v in payload["vocabulary"].items()},
            mapping={k: tuple(float(a) for a in v) for k, v in payload["mapping"].items()},
            unknown=tuple(float(a) for a in payload["unknown"]),
            output_names=tuple(payload["output_names"]),
            collisions=tuple(tuple(c) for c in payload.get("collisions", [])),
        )


def target_values(y: Sequence[str], target_levels: Sequence[str] | None = None) -> np.ndarray:
    """Numeric view of the target used by target-aware encoders.

    Binary targets become 1 for the lexicographically last level and 0
    otherwise; multi-class targets become their lexicographic level index.
    """
    y = np.asarray(y, dtype=str)
    levels = sorted(set(target_levels) if target_levels is not None else set(y.tolist()))
    index = {lvl: i for i, lvl in enumerate(levels)}
    codes = np.array([index[v] for v in y.tolist()], dtype=np.float64)
    if len(levels) == 2:
        return (codes == 1).astype(np.float64)
    return codes


def target_encode_smoothed(n_i: int, n_iy: float, prior: float, m: float = 1.0) -> float:
    """Blend of the level mean ``n_iy / n_i`` and ``prior`` with weight n_i/(n_i+m)."""
    if n_i < 1:
        raise ValueError("level needs at least one sample")
    alpha = n_i / (n_i + m)
    return alpha * (n_iy / n_i) + (1.0 - alpha) * prior


def summary_encode(level_values, global_values, p: float = 0.5, alpha_q: float = 1.0) -> float:
    """Quantile of the level shrunk toward the global quantile by ``alpha_q`` pseudo-samples."""
    level_values = np.asarray(level_values, dtype=np.float64)
    n_i = len(level_values)
    if n_i < 1:
        raise ValueError("level needs at least one sample")
    q_level = float(np.quantile(level_values, p, method="linear"))
    q_global = float(np.quantile(np.asarray(global_values, dtype=np.float64), p, method="linear"))
    return (q_level * n_i + q_global * alpha_q) / (n_i + alpha_q)


def _digits(value: int, base: int, width: int) -> tuple[float, ...]:
    out = []
    for _ in range(width):
        value, r = divmod(value, base)
        out.append(float(r))
    return tuple(reversed(out))


def digit_width(k: int, base: int) -> int:
    """Digits needed to write 0..k-1 in ``base``; at least one."""
    width, top = 1, base
    while top < k:
        top *= base
        width += 1
    return width


def fit(spec: EncoderSpec, x: Sequence[str], y: Sequence[str] | None = None, column: str = "",
        target_levels: Sequence[str] | None = None) -> FittedEncoder:
    """Fit ``spec`` on the train values ``x`` (and target ``y`` when required)."""
    x = np.asarray(x, dtype=str)
    if len(x) == 0:
        raise FitError(f"cannot fit encoder on empty column {column!r}")
    if spec.kind in TARGET_AWARE and y is None:
        raise ConfigurationError(f"{spec.kind} encoder needs the target column")
    uniq, counts = np.unique(x, return_counts=True)
    levels = uniq.tolist()
    vocab = {lvl: i for i, lvl in enumerate(levels)}
    k = len(levels)
    n = len(x)
    kind = spec.kind
    name = column or "x"

    if kind == "label":
        _, first = np.unique(x, return_index=True)
        order = [levels[i] for i in np.argsort(first, kind="stable")]
        mapping = {lvl: (float(i),) for i, lvl in enumerate(order)}
        return _make(spec, column, vocab, mapping, (UNKNOWN_INDEX,), (name,))

    if kind == "ordinal":
        mapping = {lvl: (float(i),) for i, lvl in enumerate(levels)}
        return _make(spec, column, vocab, mapping, (UNKNOWN_INDEX,), (name,))

    if kind == "rarelabel":
        freq = counts / n
        surviving = [lvl for lvl, f in zip(levels, freq) if f > spec.t]
        grouped = sorted(surviving + [RARE_TOKEN])
        index = {lvl: float(i) for i, lvl in enumerate(grouped)}
        mapping = {lvl: (index[lvl] if lvl in index else index[RARE_TOKEN],) for lvl in levels}
        return _make(spec, column, vocab, mapping, (index[RARE_TOKEN],), (name,))

    if kind == "onehot":
        eye = np.eye(k)
        mapping = {lvl: tuple(eye[i].tolist()) for i, lvl in enumerate(levels)}
        names = tuple(f"{name}={lvl}" for lvl in levels)
        return _make(spec, column, vocab, mapping, (0.0,) * k, names)

    if kind in ("binary", "basen"):
        base = 2 if kind == "binary" else int(spec.n)
        width = digit_width(k, base)
        mapping = {lvl: _digits(i, base, width) for i, lvl in enumerate(levels)}
        names = tuple(f"{name}_{kind}{d}" for d in range(width))
        return _make(spec, column, vocab, mapping, (UNKNOWN_INDEX,) * width, names)

    if kind == "frequency":
        mapping = {lvl: (float(c / n),) for lvl, c in zip(levels, counts)}
        return _make(spec, column, vocab, mapping, (0.0,), (name,))

    if kind == "target":
        yv = target_values(y, target_levels)
        prior = float(yv.mean())
        _, inverse = np.unique(x, return_inverse=True)
        sums = np.bincount(inverse.reshape(-1), weights=yv, minlength=k)
        mapping = {
            lvl: (target_encode_smoothed(int(c), float(s), prior, spec.m),)
            for lvl, c, s in zip(levels, counts, sums)
        }
        return _make(spec, column, vocab, mapping, (prior,), (name,))

    if kind == "summary":
        yv = target_values(y, target_levels)
        qs = spec.quantile_list
        mapping = {}
        for lvl in levels:
            vals = yv[x == lvl]
            mapping[lvl] = tuple(summary_encode(vals, yv, q, spec.alpha_q) for q in qs)
        unknown = tuple(float(np.quantile(yv, q, method="linear")) for q in qs)
        names = (name,) if len(qs) == 1 else tuple(f"{name}_q{q:g}" for q in qs)
        return _make(spec, column, vocab, mapping, unknown, names)

    if kind == "string_similarity":
        mapping = {
            a: tuple(jaro_similarity(a, b, winkler=spec.winkler) for b in levels) for a in levels
        }
        names = tuple(f"{name}~{lvl}" for lvl in levels)
        return _make(spec, column, vocab, mapping, (0.0,) * k, names)

    raise ConfigurationError(f"unhandled encoder kind {kind!r}")


def _make(spec, column, vocab, mapping, unknown, names) -> FittedEncoder:
    groups: dict[tuple[float, ...], list[str]] = {}
    for lvl, row in mapping.items():
        groups.setdefault(row, []).append(lvl)
    collisions = tuple(tuple(g) for g in groups.values() if len(g) > 1)
    if collisions and spec.kind not in ("rarelabel",):
        log.info("%s encoder on %r maps distinct levels to equal outputs: %s", spec.kind, column, collisions)
    for row in mapping.values():
        if not all(math.isfinite(v) for v in row):
            raise FitError(f"non-finite encoding produced for column {column!r}")
    return FittedEncoder(spec, column, vocab, mapping, tuple(float(u) for u in unknown), tuple(names), collisions)


def transform(enc: FittedEncoder, x: Sequence[str]) -> np.ndarray:
    return enc.transform(x)
