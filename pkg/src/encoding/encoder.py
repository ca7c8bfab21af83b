"""Frequency encoding of coordinates and the attention query projection.

    enc(p) = [p, sin(2^0 p), cos(2^0 p), ..., sin(2^(L-1) p), cos(2^(L-1) p)]

Coordinates are expected in normalised units (space in [-1, 1], time in
[0, 1]), so no factor of pi is applied.
"""

from __future__ import annotations
from dataclasses import dataclass

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.parameters import ParameterStore
from src.exceptions import ConfigurationError


@dataclass(frozen=True)
class FrequencyEncoderConfig:
    L: int
    include_input: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise ConfigurationError(f'L must be positive, got {self.L}',
                                     field='L')

    def output_dim(self, k: int) -> int:
        """Width of the encoding of `k` scalar components."""

        return k * (2 * self.L + (1 if self.include_input else 0))


def encode(p: Tensor | np.ndarray, cfg: FrequencyEncoderConfig) -> Tensor:
    """Encodes the trailing axis of `p`.

    The raw input comes first when `include_input` is set, then for each
    frequency 2^l a block of k sines followed by k cosines.
    """

    p = ops.as_tensor(p)
    parts = [p] if cfg.include_input else []
    for level in range(cfg.L):
        scaled = ops.scale(p, 2.0 ** level)
        parts.append(ops.sin(scaled))
        parts.append(ops.cos(scaled))
    return ops.concat(parts, axis=-1)


class QueryProjection:
    """Learnable linear map phi_q from an encoding to an attention query."""

    def __init__(self,
                 store: ParameterStore,
                 prefix: str,
                 d_in: int,
                 d_q: int):
        self.d_in = d_in
        self.d_q = d_q
        self.weight, self.bias = store.linear(prefix, d_in, d_q, 'attention')

    def __call__(self, enc: Tensor) -> Tensor:
        return project_query(enc, self.weight, self.bias)


def project_query(enc: Tensor, weight: Tensor, bias: Tensor | None=None
                 ) -> Tensor:
    return ops.linear(enc, weight, bias)
