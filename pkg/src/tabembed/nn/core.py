"""Parameters, the module protocol and structural containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

DEFAULT_DTYPE = np.float32


@dataclass(eq=False)
class Parameter:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


def check_finite(x: np.ndarray, where: str) -> np.ndarray:
    if not np.isfinite(x).all():
        raise FloatingPointError(f"non-finite values produced by {where}")
    return x


class Module:
    """A differentiable block.

    ``forward`` caches what ``backward`` needs; ``backward`` receives the
    gradient of the loss with respect to the output, accumulates parameter
    gradients and returns the gradient with respect to the input.
    """

    training: bool = True
    name: str = ""

    def __call__(self, x):
        out = self.forward(x)
        check_finite(out, type(self).__name__ + (f" {self.name}" if self.name else ""))
        return out

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def children(self) -> Iterable[Module]:
        return ()

    def own_parameters(self) -> list[Parameter]:
        return []

    def parameters(self) -> list[Parameter]:
        out = list(self.own_parameters())
        for child in self.children():
            out.extend(child.parameters())
        return out

    def modules(self) -> Iterator[Module]:
        yield self
        for child in self.children():
            yield from child.modules()

    def train(self, mode: bool = True) -> Module:
        for m in self.modules():
            m.training = mode
        return self

    def eval(self) -> Module:
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def n_parameters(self) -> int:
        return sum(p.value.size for p in self.parameters())


class Sequential(Module):
    def __init__(self, *layers: Module, name: str = "") -> None:
        self.layers = list(layers)
        self.name = name

    def children(self) -> Iterable[Module]:
        return self.layers

    def forward(self, x):
        for layer in self.layers:
            x = layer(x)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad


class Residual(Module):
    """``x + inner(x)``."""

    def __init__(self, inner: Module, name: str = "") -> None:
        self.inner = inner
        self.name = name

    def children(self) -> Iterable[Module]:
        return (self.inner,)

    def forward(self, x):
        return x + self.inner(x)

    def backward(self, grad):
        return grad + self.inner.backward(grad)


class Flatten(Module):
    """Merge all axes after the first."""

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)
