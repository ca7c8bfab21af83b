"""Emission-absorption compositing.

    C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i + T_{N+1} background
    T_i = exp(-sum_{j<i} sigma_j delta_j)
"""

from __future__ import annotations
from dataclasses import dataclass

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor


@dataclass
class SampleSet:
    taus: np.ndarray
    sigmas: np.ndarray | Tensor
    colors: np.ndarray | Tensor
    deltas: np.ndarray


def compositing_weights(sigma: np.ndarray, deltas: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Weights `[R, N]` and residual transmittance `[R]`."""

    sd = np.asarray(sigma) * deltas
    transmittance = np.exp(-(np.cumsum(sd, axis=-1) - sd))
    weights = transmittance * (1.0 - np.exp(-sd))
    return weights, np.exp(-np.sum(sd, axis=-1))


def composite_rays(sigma: Tensor,
                   color: Tensor,
                   deltas: np.ndarray,
                   background: np.ndarray) -> Tensor:
    """Pixel colours `[R, 3]` from densities `[R, N]` and colours
    `[R, N, 3]`."""

    R, N = sigma.shape
    sd = ops.mul(sigma, deltas)
    alpha = ops.sub(1.0, ops.exp(ops.neg(sd)))
    transmittance = ops.exp(ops.neg(ops.cumsum(sd, axis=-1, exclusive=True)))
    weights = ops.mul(transmittance, alpha)
    residual = ops.exp(ops.neg(ops.sum(sd, axis=-1, keepdims=True)))

    emitted = ops.reshape(ops.matmul(ops.reshape(weights, (R, 1, N)), color),
                          (R, 3))
    bg = np.asarray(background, dtype=sigma.dtype).reshape(1, 3)
    return ops.add(emitted, ops.matmul(residual, bg))


def composite(samples: SampleSet, background: np.ndarray) -> Tensor:
    """Colour `[3]` of one ray."""

    sigma = ops.as_tensor(samples.sigmas)
    color = ops.as_tensor(samples.colors, sigma)
    N = sigma.size
    rgb = composite_rays(ops.reshape(sigma, (1, N)),
                         ops.reshape(color, (1, N, 3)),
                         np.asarray(samples.deltas).reshape(1, N),
                         background)
    return ops.reshape(rgb, (3,))
