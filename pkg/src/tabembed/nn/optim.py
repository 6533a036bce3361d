"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tabembed.nn.core import Parameter


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first: list[np.ndarray] = field(default_factory=list)
    second: list[np.ndarray] = field(default_factory=list)


class Adam:
    def __init__(self, params: Sequence[Parameter], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.params = list(params)
        self.state = AdamState(
            lr,
            beta1,
            beta2,
            eps,
            0,
            [np.zeros_like(p.value) for p in self.params],
            [np.zeros_like(p.value) for p in self.params],
        )

    def step(self) -> None:
        adam_step(self.params, self.state)


def adam_step(params: Sequence[Parameter], state: AdamState) -> None:
    """One bias-corrected update of every parameter, then zero the gradients."""
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, m, v in zip(params, state.first, state.second):
        g = p.grad
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        if state.lr != 0.0:
            p.value -= (state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)).astype(p.value.dtype)
        p.zero_grad()
