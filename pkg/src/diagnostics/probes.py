"""Latent-space probes: per-sample density, compositing weight and the
attention each query puts on every latent code.

CSV columns are `tau, x, y, z, sigma, weight`, followed by one column
`{channel}_h{head}_c{code}` per attention weight, density channel first.
Weights are written raw; the PNG view normalises each row by its
maximum, brighter meaning a higher weight.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.model import SLS4DModel
from src.radiance.field import CHANNELS
from src.renderer import (
    Ray,
    sample_along,
    sample_deltas,
    compositing_weights,
    write_png
)


logger = logging.getLogger(__name__)


BASE_COLUMNS = ('tau', 'x', 'y', 'z', 'sigma', 'weight')
SUPPORT_MASS = 0.95


def attention_columns(weights: dict[str, np.ndarray]) -> list[str]:
    columns = []
    for channel in CHANNELS:
        if channel not in weights:
            continue
        _, heads, codes = weights[channel].shape
        columns += [
            f'{channel}_h{h}_c{b}'
                for h in range(heads)
                for b in range(codes)
        ]
    return columns


def _attention_block(weights: dict[str, np.ndarray]) -> np.ndarray:
    blocks = [
        weights[channel].reshape(weights[channel].shape[0], -1)
            for channel
            in CHANNELS
            if channel in weights
    ]
    if not blocks:
        return np.zeros((0, 0))
    return np.concatenate(blocks, axis=-1)


def row_normalized(matrix: np.ndarray) -> np.ndarray:
    peak = matrix.max(axis=-1, keepdims=True)
    return np.divide(matrix, peak, out=np.zeros_like(matrix),
                     where=peak > 0)


@dataclass
class RayProbeReport:
    ray: Ray
    taus: np.ndarray
    points: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    attention: dict[str, np.ndarray] = field(default_factory=dict)
    ray_id: str = 'ray'

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            'tau': self.taus,
            'x': self.points[:, 0],
            'y': self.points[:, 1],
            'z': self.points[:, 2],
            'sigma': self.sigma,
            'weight': self.weights
        })
        columns = attention_columns(self.attention)
        if columns:
            block = pd.DataFrame(_attention_block(self.attention),
                                 columns=columns)
            frame = pd.concat([frame, block], axis=1)
        return frame

    def to_csv(self, path: str) -> str:
        self.to_frame().to_csv(path, index=False)
        logger.info(f'wrote probe of {self.ray_id} to {path}')
        return path

    def weight_matrix(self, channel: str='density') -> np.ndarray:
        """Samples by (head, code) attention weights of one channel."""

        weights = self.attention[channel]
        return weights.reshape(weights.shape[0], -1)

    def write_weight_png(self, path: str, channel: str='density') -> str:
        return write_png(path, row_normalized(self.weight_matrix(channel)))


def read_probe_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, float_precision='round_trip')


def probe_ray(model: SLS4DModel,
              ray: Ray,
              N: int=9,
              ray_id: str='ray') -> RayProbeReport:
    """Evaluates `N` evenly spaced samples along `ray`."""

    taus = sample_along(ray, N)
    points = ray.origin + taus[:, None] * ray.direction
    times = np.full(len(taus), ray.time)
    dirs = np.broadcast_to(ray.direction, points.shape)

    _, sigma = model(points, times, dirs)
    sigma = sigma.data.reshape(-1).astype(np.float64)
    deltas = sample_deltas(taus[None, :], np.array([ray.far]))
    weights, _ = compositing_weights(sigma[None, :], deltas)
    attention = {
        channel: value.astype(np.float64)
            for channel, value
            in model.attention_weights(points, times).items()
    }
    return RayProbeReport(ray, taus, points, sigma, weights[0], attention,
                          ray_id)


@dataclass
class PointProbeReport:
    points: np.ndarray
    time: float
    attention: dict[str, np.ndarray]

    def vectors(self, channel: str='density') -> np.ndarray:
        """Head-averaged weight vector `[P, B]` per point."""

        return self.attention[channel].mean(axis=1)

    def effective_support(self,
                          channel: str='density',
                          mass: float=SUPPORT_MASS) -> np.ndarray:
        """Fewest codes holding `mass` of each point's weight."""

        ordered = -np.sort(-self.vectors(channel), axis=-1)
        cumulative = np.cumsum(ordered, axis=-1)
        target = mass * cumulative[:, -1:]
        return np.argmax(cumulative >= target - 1e-12, axis=-1) + 1

    def cosine_similarity(self, i: int, j: int,
                          channel: str='density') -> float:
        vectors = self.vectors(channel)
        a, b = vectors[i], vectors[j]
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        return float(a @ b / denom) if denom > 0 else 0.0

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.points, columns=['x', 'y', 'z'])
        for channel in CHANNELS:
            if channel in self.attention:
                frame[f'{channel}_support'] = self.effective_support(channel)
        columns = attention_columns(self.attention)
        if columns:
            block = pd.DataFrame(_attention_block(self.attention),
                                 columns=columns)
            frame = pd.concat([frame, block], axis=1)
        return frame


def probe_points(model: SLS4DModel,
                 points: np.ndarray,
                 time: float) -> PointProbeReport:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    times = np.full(len(points), time)
    attention = {
        channel: value.astype(np.float64)
            for channel, value
            in model.attention_weights(points, times).items()
    }
    return PointProbeReport(points, float(time), attention)
