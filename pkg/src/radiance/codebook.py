"""Feature sources for the radiance field: the sparse latent codebook and
the dense trilinear grid it replaces."""

from __future__ import annotations

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor, make_result
from src.autodiff.parameters import ParameterStore
from src.exceptions import ConfigurationError


CODE_STD = 0.1

_CORNERS = np.array([[(corner >> axis) & 1 for axis in range(3)]
                     for corner in range(8)])


class LatentCodebook:
    """B global latent codes of width F, stored row-major as `[B, F]`."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 B: int,
                 F: int,
                 std: float=CODE_STD):
        if B < 1:
            raise ConfigurationError(f'B must be at least 1, got {B}',
                                     field='B')
        self.name = name
        self.B = B
        self.F = F
        self.codes = store.create(f'{name}.codes', (B, F), 'feature_space',
                                  init='normal', std=std)

    def __len__(self) -> int:
        return self.B


def trilinear_coordinates(points: np.ndarray, N: int
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Flat corner indices `[P, 8]` and weights `[P, 8]` on an N^3 grid.

    Grid vertices sit at -1 + 2i/(N-1) along each axis. Points outside
    [-1, 1]^3 are clamped to the boundary.
    """

    index, frac = _cell(np.asarray(points, dtype=np.float64), N)
    return index, _corner_weights(frac)


def _cell(points: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    u = (np.clip(points, -1.0, 1.0) + 1.0) * 0.5 * (N - 1)
    lower = np.minimum(np.floor(u), N - 2).astype(np.intp)
    vertex = lower[..., None, :] + _CORNERS
    index = (vertex[..., 0] * N + vertex[..., 1]) * N + vertex[..., 2]
    return index, u - lower


def _corner_weights(frac: np.ndarray) -> np.ndarray:
    factors = np.where(_CORNERS == 1, frac[..., None, :],
                       1.0 - frac[..., None, :])
    return np.prod(factors, axis=-1)


def _corner_weight_gradients(frac: np.ndarray) -> np.ndarray:
    """d(weight)/d(frac) as `[..., 8, 3]`."""

    factors = np.where(_CORNERS == 1, frac[..., None, :],
                       1.0 - frac[..., None, :])
    signs = np.where(_CORNERS == 1, 1.0, -1.0)
    grads = np.empty(factors.shape)
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        grads[..., axis] = signs[:, axis] \
            * factors[..., others[0]] * factors[..., others[1]]
    return grads


def trilinear_sample(features: Tensor, points: Tensor, N: int) -> Tensor:
    """Interpolates rows of `features` `[N^3, F]` at `points` `[P, 3]`.

    Differentiable with respect to the features and the point positions;
    clamped coordinates receive no positional gradient.
    """

    points = ops.as_tensor(points)
    p_data = points.data.astype(np.float64)
    index, frac = _cell(p_data, N)
    weights = _corner_weights(frac).astype(features.dtype)
    rows = features.data[index]
    data = np.sum(rows * weights[..., None], axis=-2)
    inside = (np.abs(p_data) <= 1.0).astype(np.float64)
    n_rows, width = features.shape

    def backward(g: np.ndarray):
        contrib = weights[..., None] * g[..., None, :]
        grad_features = np.zeros((n_rows, width), dtype=g.dtype)
        np.add.at(grad_features, index.reshape(-1),
                  contrib.reshape(-1, width))

        dfeat = np.sum(rows * g[..., None, :], axis=-1)
        dfrac = np.sum(_corner_weight_gradients(frac) * dfeat[..., None],
                       axis=-2)
        grad_points = dfrac * 0.5 * (N - 1) * inside
        return grad_features, grad_points.astype(points.dtype)

    return make_result('trilinear_sample', data, (features, points),
                       backward)


class TrilinearGridField:
    """Dense N^3 grid of features, interpolated from the 8 nearest vertices."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 N: int,
                 F: int,
                 std: float=CODE_STD):
        if N < 2:
            raise ConfigurationError(f'grid resolution must be at least 2,'
                                     f' got {N}', field='grid_resolution')
        self.name = name
        self.N = N
        self.F = F
        self.features = store.create(f'{name}.grid', (N ** 3, F),
                                     'feature_space', init='normal', std=std)

    def vertex(self, i: int, j: int, k: int) -> np.ndarray:
        return self.features.data[(i * self.N + j) * self.N + k]

    def vertex_position(self, i: int, j: int, k: int) -> np.ndarray:
        return -1.0 + 2.0 * np.array([i, j, k], dtype=np.float64) \
            / (self.N - 1)

    def __call__(self, points: Tensor | np.ndarray) -> Tensor:
        return grid_interpolate(points, self)


def grid_interpolate(points: Tensor | np.ndarray,
                     grid: TrilinearGridField) -> Tensor:
    """f_p = sum_i w_i f_{p_i} over the 8 surrounding vertices.

    Accepts a single point `[3]` or a batch `[P, 3]`.
    """

    points = ops.as_tensor(points, grid.features) \
        if not isinstance(points, Tensor) else points
    if points.ndim == 1:
        batch = ops.reshape(points, (1, 3))
        return ops.reshape(trilinear_sample(grid.features, batch, grid.N),
                           (grid.F,))
    return trilinear_sample(grid.features, points, grid.N)
