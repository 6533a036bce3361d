"""Shared test utilities that are not reference implementations."""

from __future__ import annotations

import numpy as np

from tabembed.dataset import table_from_rows
from tabembed.encoders import EncoderSpec, encode_table
from tabembed.nn import bce_grad, bce_loss, grad_check


def model_grad_check(model, x, y, tolerance=1e-3, dropout_seed=7, **kw):
    """Grad-check a classifier under mean BCE, replaying the same dropout masks on every call."""

    def loss_and_backward():
        model.zero_grad()
        model.reset_dropout(dropout_seed)
        prob = model(x)
        model.backward(bce_grad(prob, y))
        return bce_loss(prob, y)

    def loss_only():
        model.reset_dropout(dropout_seed)
        return bce_loss(model(x), y)

    model.train()
    return grad_check(model.parameters(), loss_and_backward, loss_only, tolerance=tolerance, **kw)


def toy_splits(n_target_levels=2, encoder="ordinal", n=150, seed=0):
    """Three categorical columns whose first column mostly decides the target."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        a = int(rng.integers(0, 3))
        b = rng.choice(["p", "q", "r", "s"])
        c = rng.choice(["u", "v"])
        t = a % n_target_levels if rng.random() < 0.9 else int(rng.integers(0, n_target_levels))
        rows.append([f"a{a}", b, c, f"t{t}"])
    table = table_from_rows(["a", "b", "c", "y"], rows, "y")
    cut1, cut2 = int(0.7 * n), int(0.85 * n)
    parts = (np.arange(cut1), np.arange(cut1, cut2), np.arange(cut2, n))
    return encode_table(*(table.take(p) for p in parts), EncoderSpec(encoder))


def projection_check(module, x, tolerance, seed=0, **kw):
    """Grad-check ``module`` under the loss sum(out * R) for a fixed random R."""
    rng = np.random.default_rng(seed)
    r = rng.normal(size=module.forward(x).shape)

    def loss_and_backward():
        module.zero_grad()
        out = module.forward(x)
        module.backward(r)
        return float(np.sum(out * r))

    def loss_only():
        return float(np.sum(module.forward(x) * r))

    return grad_check(module.parameters(), loss_and_backward, loss_only, tolerance=tolerance, **kw)
