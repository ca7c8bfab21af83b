"""Rendering of ray batches and full images through any radiance field.

A field is any object with `__call__(points, times, dirs)` returning
colour `[P, 3]` and density `[P, 1]` tensors, plus `density(points,
times)`. The learned model and the analytic synthetic scenes both
satisfy it.
"""

from __future__ import annotations
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor, default_dtype
from src.config import app_config
from src.renderer.rays import Camera, RayBatch, generate_rays
from src.renderer.occupancy import OccupancyGrid
from src.renderer.sampling import (
    sample_distances,
    sample_deltas,
    sample_points,
    keep_mask
)
from src.renderer.composite import composite_rays, compositing_weights


logger = logging.getLogger(__name__)


class RadianceFieldLike(Protocol):
    def __call__(self,
                 points: np.ndarray,
                 times: np.ndarray,
                 dirs: np.ndarray) -> tuple[Tensor, Tensor]:
        ...

    def density(self, points: np.ndarray, times: np.ndarray) -> Tensor:
        ...


@dataclass
class RenderResult:
    rgb: Tensor
    taus: np.ndarray
    deltas: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    evaluated: int

    @property
    def residual(self) -> np.ndarray:
        return 1.0 - self.weights.sum(axis=-1)


def _field_dtype(field: RadianceFieldLike) -> np.dtype:
    dtype = getattr(field, 'dtype', None)
    return np.dtype(dtype) if dtype is not None else default_dtype()


def render_rays(field: RadianceFieldLike,
                rays: RayBatch,
                n_samples: int,
                background: np.ndarray,
                stratified: bool=False,
                rng: np.random.Generator | None=None,
                occ: OccupancyGrid | None=None) -> RenderResult:
    """Renders every ray of the batch in a single field evaluation.

    Skipped samples get zero density and keep their original spacing,
    so the compositing sum still runs over all N bins.
    """

    R = len(rays)
    taus = sample_distances(rays.near, rays.far, n_samples,
                            stratified=stratified, rng=rng)
    deltas = sample_deltas(taus, rays.far)
    points = sample_points(rays, taus)
    keep = np.flatnonzero(keep_mask(points, occ))
    dtype = _field_dtype(field)

    if keep.size:
        flat_points = points.reshape(-1, 3)[keep]
        flat_times = np.repeat(rays.times, n_samples)[keep]
        flat_dirs = np.repeat(rays.directions, n_samples, axis=0)[keep]
        color_k, sigma_k = field(flat_points, flat_times, flat_dirs)
        sigma = ops.reshape(ops.scatter_rows(sigma_k, keep, R * n_samples),
                            (R, n_samples))
        color = ops.reshape(ops.scatter_rows(color_k, keep, R * n_samples),
                            (R, n_samples, 3))
    else:
        sigma = Tensor.wrap(np.zeros((R, n_samples), dtype=dtype))
        color = Tensor.wrap(np.zeros((R, n_samples, 3), dtype=dtype))

    rgb = composite_rays(sigma, color, deltas, background)
    weights, _ = compositing_weights(sigma.data, deltas)
    return RenderResult(rgb, taus, deltas, sigma.data, weights, keep.size)


@dataclass
class _Chunk:
    start: int
    stop: int
    taus: np.ndarray
    deltas: np.ndarray
    keep: np.ndarray
    offset: int


class _BlockEvaluator:
    """Evaluates kept samples in fixed global blocks.

    Samples are numbered in image order across all chunks and every
    evaluation sees exactly `block_size` rows (the last block is padded),
    so a sample's value never depends on how rays were chunked.
    """

    def __init__(self,
                 field: RadianceFieldLike,
                 block_size: int,
                 threads: int):
        self.field = field
        self.block_size = block_size
        self.threads = threads
        self.inputs: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self.pending = 0
        self.evaluated = 0
        self.base = 0
        self.colors: list[np.ndarray] = []
        self.sigmas: list[np.ndarray] = []

    def push(self, points: np.ndarray, times: np.ndarray, dirs: np.ndarray
            ) -> None:
        self.inputs.append((points, times, dirs))
        self.pending += points.shape[0]

    def _evaluate(self, block: tuple[np.ndarray, np.ndarray, np.ndarray]
                 ) -> tuple[np.ndarray, np.ndarray]:
        points, times, dirs = block
        color, sigma = self.field(points, times, dirs)
        return color.data, sigma.data.reshape(-1)

    def flush(self, final: bool=False) -> None:
        if not self.pending:
            return
        n_blocks = self.pending // self.block_size
        if final and self.pending % self.block_size:
            n_blocks += 1
        if n_blocks == 0:
            return

        points = np.concatenate([i[0] for i in self.inputs])
        times = np.concatenate([i[1] for i in self.inputs])
        dirs = np.concatenate([i[2] for i in self.inputs])
        used = min(n_blocks * self.block_size, points.shape[0])
        pad = n_blocks * self.block_size - used

        blocks = []
        for b in range(n_blocks):
            lo, hi = b * self.block_size, min((b + 1) * self.block_size, used)
            block = (points[lo:hi], times[lo:hi], dirs[lo:hi])
            if hi - lo < self.block_size:
                block = (
                    np.concatenate([block[0], np.zeros((pad, 3))]),
                    np.concatenate([block[1], np.zeros(pad)]),
                    np.concatenate([block[2], np.zeros((pad, 3))])
                )
            blocks.append(block)

        if self.threads > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(self._evaluate, blocks))
        else:
            results = [self._evaluate(block) for block in blocks]

        for b, (color, sigma) in enumerate(results):
            rows = min(self.block_size, used - b * self.block_size)
            self.colors.append(color[:rows])
            self.sigmas.append(sigma[:rows])
        self.evaluated += used

        rest = (points[used:], times[used:], dirs[used:])
        self.inputs = [rest] if rest[0].shape[0] else []
        self.pending = rest[0].shape[0]

    def take(self, offset: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Results for global samples [offset, offset + count)."""

        colors = np.concatenate(self.colors) if self.colors \
            else np.zeros((0, 3))
        sigmas = np.concatenate(self.sigmas) if self.sigmas \
            else np.zeros(0)
        lo = offset - self.base
        out = colors[lo:lo + count], sigmas[lo:lo + count]

        self.colors = [colors[lo + count:]]
        self.sigmas = [sigmas[lo + count:]]
        self.base = offset + count
        return out


def render_image(field: RadianceFieldLike,
                 camera: Camera,
                 time: float,
                 n_samples: int,
                 background: np.ndarray,
                 chunk_size: int=4096,
                 block_size: int=65536,
                 occ: OccupancyGrid | None=None,
                 threads: int | None=None) -> np.ndarray:
    """Renders a full `[H, W, 3]` image deterministically.

    Rays are processed `chunk_size` at a time; field evaluations are
    grouped into global blocks so the image is independent of
    `chunk_size`.
    """

    threads = threads or app_config.threads
    rays = generate_rays(camera, time=time)
    n_rays = len(rays)
    image = np.zeros((n_rays, 3))
    evaluator = _BlockEvaluator(field, block_size, threads)
    queue: list[_Chunk] = []
    offset = 0
    background = np.asarray(background, dtype=np.float64)

    def finish(chunk: _Chunk) -> None:
        R = chunk.stop - chunk.start
        color_k, sigma_k = evaluator.take(chunk.offset, chunk.keep.size)
        sigma = np.zeros(R * n_samples)
        color = np.zeros((R * n_samples, 3))
        sigma[chunk.keep] = sigma_k
        color[chunk.keep] = color_k
        weights, residual = compositing_weights(sigma.reshape(R, n_samples),
                                                chunk.deltas)
        image[chunk.start:chunk.stop] = np.einsum(
            'rn,rnc->rc', weights, color.reshape(R, n_samples, 3)
        ) + residual[:, None] * background

    for start in range(0, n_rays, chunk_size):
        stop = min(start + chunk_size, n_rays)
        batch = rays[start:stop]
        taus = sample_distances(batch.near, batch.far, n_samples)
        points = sample_points(batch, taus)
        keep = np.flatnonzero(keep_mask(points, occ))
        evaluator.push(points.reshape(-1, 3)[keep],
                       np.repeat(batch.times, n_samples)[keep],
                       np.repeat(batch.directions, n_samples, axis=0)[keep])
        queue.append(_Chunk(start, stop, taus,
                            sample_deltas(taus, batch.far), keep, offset))
        offset += keep.size

        evaluator.flush()
        while queue and queue[0].offset + queue[0].keep.size \
                <= evaluator.evaluated:
            finish(queue.pop(0))

    evaluator.flush(final=True)
    for chunk in queue:
        finish(chunk)

    logger.info(f'rendered {camera.width}x{camera.height} image at time'
                f' {time:.3f} ({offset} field evaluations)')
    return image.reshape(camera.height, camera.width, 3)
