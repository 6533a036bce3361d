"""Binary cross-entropy on probabilities."""

from __future__ import annotations

import numpy as np

CLAMP = 1e-7


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    """Mean of -[y log p + (1-y) log(1-p)] over every entry, p clamped to [1e-7, 1-1e-7]."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    assert p.shape == y.shape, f"shape mismatch {p.shape} vs {y.shape}"
    pc = np.clip(p, CLAMP, 1.0 - CLAMP)
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))


def bce_grad(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of :func:`bce_loss` with respect to ``p``; zero where the clamp is active."""
    p64 = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    inside = (p64 > CLAMP) & (p64 < 1.0 - CLAMP)
    pc = np.clip(p64, CLAMP, 1.0 - CLAMP)
    g = (pc - y) / (pc * (1.0 - pc)) / p64.size
    return np.where(inside, g, 0.0).astype(np.asarray(p).dtype)
