from __future__ import annotations
from typing import Callable, Literal

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.parameters import ParameterStore


Activation = Literal['relu', 'gelu', 'tanh', 'sigmoid', 'softplus', 'none']


ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    'relu': ops.relu,
    'gelu': ops.gelu,
    'tanh': ops.tanh,
    'sigmoid': ops.sigmoid,
    'softplus': ops.softplus,
    'none': lambda x: x
}


class Linear:
    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_in: int,
                 d_out: int,
                 group: str,
                 activation: Activation='none',
                 gain: float=1.0,
                 zero: bool=False):
        self.name = name
        self.d_in = d_in
        self.d_out = d_out
        self.activation = activation
        self.weight, self.bias = store.linear(name, d_in, d_out, group,
                                              gain=gain, zero=zero)

    def __call__(self, x: Tensor) -> Tensor:
        y = ops.linear(x, self.weight, self.bias)
        return ACTIVATIONS[self.activation](y)


class GeGLU:
    """Gated layer GELU(xW + b) * (xV + c) with all four parts learnable."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_in: int,
                 d_out: int,
                 group: str):
        self.name = name
        self.d_in = d_in
        self.d_out = d_out
        self.W, self.b = store.linear(f'{name}.gate', d_in, d_out, group)
        self.V, self.c = store.linear(f'{name}.value', d_in, d_out, group)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.geglu(x, self.W, self.V, self.b, self.c)


class Sequential:
    def __init__(self, layers: list[Linear | GeGLU]):
        self.layers = layers

    def __len__(self) -> int:
        return len(self.layers)

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x
