from __future__ import annotations

import numpy as np

from src.renderer.rays import Ray, RayBatch, BOX_MIN, BOX_MAX
from src.renderer.occupancy import OccupancyGrid
from src.exceptions import ConfigurationError


def sample_distances(near: np.ndarray,
                     far: np.ndarray,
                     N: int,
                     stratified: bool=False,
                     rng: np.random.Generator | None=None) -> np.ndarray:
    """Distances `[R, N]` in N equal bins of [near, far].

    Deterministic mode takes bin centres; stratified mode draws one
    uniform point inside each bin.
    """

    if N < 1:
        raise ConfigurationError(f'need at least one sample, got {N}',
                                 field='n_samples')
    near = np.asarray(near, dtype=np.float64).reshape(-1, 1)
    far = np.asarray(far, dtype=np.float64).reshape(-1, 1)
    if stratified:
        rng = rng or np.random.default_rng()
        offsets = rng.uniform(size=(near.shape[0], N))
    else:
        offsets = np.full((near.shape[0], N), 0.5)
    bins = np.arange(N, dtype=np.float64)
    return near + (far - near) * (bins + offsets) / N


def sample_deltas(taus: np.ndarray, far: np.ndarray) -> np.ndarray:
    """delta_i = tau_{i+1} - tau_i, with delta_N = far - tau_N."""

    far = np.asarray(far, dtype=np.float64).reshape(-1, 1)
    return np.concatenate([np.diff(taus, axis=-1), far - taus[:, -1:]],
                          axis=-1)


def sample_points(rays: RayBatch, taus: np.ndarray) -> np.ndarray:
    return rays.origins[:, None, :] + taus[..., None] \
        * rays.directions[:, None, :]


def keep_mask(points: np.ndarray, occ: OccupancyGrid | None=None
             ) -> np.ndarray:
    """Samples that need a field evaluation.

    Samples outside the normalised box are always skipped; with a grid,
    samples in empty cells are skipped too.
    """

    if occ is not None:
        return occ.contains(points)
    return np.all((points >= BOX_MIN) & (points <= BOX_MAX), axis=-1)


def sample_along(ray: Ray,
                 N: int,
                 stratified: bool=False,
                 occ: OccupancyGrid | None=None,
                 rng: np.random.Generator | None=None) -> np.ndarray:
    """Increasing distances along one ray that survive empty-space
    skipping."""

    taus = sample_distances(np.array([ray.near]), np.array([ray.far]), N,
                            stratified=stratified, rng=rng)
    if occ is None:
        return taus[0]
    points = ray.origin + taus[0, :, None] * ray.direction
    return taus[0][occ.contains(points)]
