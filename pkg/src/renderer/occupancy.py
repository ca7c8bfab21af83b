"""Coarse occupancy grid for empty-space skipping."""

from __future__ import annotations
import logging
from typing import Protocol

import numpy as np

from src.config import OccupancyConfig
from src.renderer.rays import BOX_MIN, BOX_MAX


logger = logging.getLogger(__name__)


class DensityField(Protocol):
    def density(self, points: np.ndarray, times: np.ndarray):
        ...


class OccupancyGrid:
    """Boolean R^3 grid over the normalised box [-1, 1]^3.

    A cell is marked empty when the highest density seen at its sampled
    points over the sampled times stayed below `threshold` at the last
    update. Points outside the box are never occupied. Fresh grids mark
    every cell occupied.
    """

    def __init__(self,
                 resolution: int=64,
                 threshold: float=0.01,
                 cadence: int=500,
                 n_times: int=8):
        self.resolution = resolution
        self.threshold = threshold
        self.cadence = cadence
        self.n_times = n_times
        self.grid = np.ones((resolution,) * 3, dtype=bool)
        self.cell_size = (BOX_MAX - BOX_MIN) / resolution
        self.last_update: int | None = None

    @classmethod
    def from_config(cls, cfg: OccupancyConfig) -> OccupancyGrid:
        return cls(cfg.resolution, cfg.threshold, cfg.cadence, cfg.n_times)

    @property
    def occupied_fraction(self) -> float:
        return float(self.grid.mean())

    def cell_of(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Integer cell coordinates `[P, 3]` and an inside-the-box mask."""

        points = np.asarray(points, dtype=np.float64)
        inside = np.all((points >= BOX_MIN) & (points <= BOX_MAX), axis=-1)
        cells = np.floor((points - BOX_MIN) / self.cell_size).astype(np.intp)
        cells = np.clip(cells, 0, self.resolution - 1)
        return cells, inside

    def contains(self, points: np.ndarray) -> np.ndarray:
        """True for points inside the box that fall in an occupied cell."""

        cells, inside = self.cell_of(points)
        occupied = self.grid[cells[..., 0], cells[..., 1], cells[..., 2]]
        return inside & occupied

    def set_region(self, lower: np.ndarray, upper: np.ndarray,
                   occupied: bool) -> None:
        """Marks every cell whose centre lies in [lower, upper]."""

        centres = self.cell_centres()
        mask = np.all((centres >= lower) & (centres <= upper), axis=-1)
        self.grid.reshape(-1)[mask] = occupied

    def cell_centres(self) -> np.ndarray:
        idx = np.indices((self.resolution,) * 3).reshape(3, -1).T
        return BOX_MIN + (idx + 0.5) * self.cell_size

    def jittered_points(self, rng: np.random.Generator) -> np.ndarray:
        """One uniformly jittered point per cell, in flat cell order."""

        idx = np.indices((self.resolution,) * 3).reshape(3, -1).T
        return BOX_MIN + (idx + rng.uniform(size=idx.shape)) * self.cell_size

    def state(self) -> np.ndarray:
        return self.grid.astype(np.uint8)

    def load_state(self, state: np.ndarray) -> None:
        self.grid = np.asarray(state).astype(bool) \
            .reshape((self.resolution,) * 3)


def update_occupancy(field: DensityField,
                     occ: OccupancyGrid,
                     iteration: int,
                     rng: np.random.Generator | None=None,
                     block_size: int=65536) -> OccupancyGrid:
    """Re-evaluates the grid when `iteration` falls on the cadence.

    For each of `n_times` random times one jittered point per cell is
    evaluated; a cell stays occupied iff its maximum density reaches the
    threshold. Thin features smaller than a cell can be missed by the
    point sampling, so empty cells are a probabilistic statement.
    """

    if iteration % occ.cadence != 0:
        return occ
    rng = rng or np.random.default_rng(iteration)

    n_cells = occ.resolution ** 3
    max_sigma = np.zeros(n_cells)
    for t in rng.uniform(0.0, 1.0, size=occ.n_times):
        points = occ.jittered_points(rng)
        for start in range(0, n_cells, block_size):
            block = points[start:start + block_size]
            sigma = field.density(block, np.full(block.shape[0], t))
            sigma = np.asarray(getattr(sigma, 'data', sigma)).reshape(-1)
            np.maximum(max_sigma[start:start + block_size], sigma,
                       out=max_sigma[start:start + block_size])

    occ.grid = (max_sigma >= occ.threshold).reshape((occ.resolution,) * 3)
    occ.last_update = iteration
    fraction = occ.occupied_fraction
    if fraction == 0.0:
        logger.warning(f'occupancy grid is empty after update at'
                       f' iteration {iteration}')
    else:
        logger.info(f'occupancy update at iteration {iteration}:'
                    f' {fraction:.3f} of cells occupied')
    return occ
