"""Procedural dynamic scenes with closed-form ground truth.

Primitives have constant density and a colour that depends only on the
viewing direction, and move along straight lines over t in [0, 1]. The
emission-absorption integral along a ray is then a finite sum over the
segments between primitive entry and exit points.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from tqdm import tqdm

from src.autodiff.tensor import Tensor
from src.exceptions import ConfigurationError
from src.renderer.rays import (
    BOX_MIN,
    BOX_MAX,
    Camera,
    RayBatch,
    look_at,
    generate_rays
)
from src.renderer.render import render_image
from src.data.dataset import (
    DynamicDataset,
    Frame,
    SPLITS,
    WHITE,
    write_dnerf
)


logger = logging.getLogger(__name__)


Shape = Literal['sphere', 'box']

VIEW_AXIS = np.array([0.0, 0.0, 1.0])

# D-NeRF synthetic scenes use this field of view
DEFAULT_CAMERA_ANGLE_X = 0.6911112070083618
DEFAULT_CAMERA_DISTANCE = 4.0


@dataclass
class Primitive:
    """A sphere (`size` = radius) or box (`size` = half extents) whose
    centre at time t is `center + velocity * t`."""

    shape: Shape
    center: np.ndarray
    size: np.ndarray | float
    color: np.ndarray
    density: float
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    anisotropy: float = 0.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        self.color = np.asarray(self.color, dtype=np.float64)
        self.velocity = np.asarray(self.velocity, dtype=np.float64)
        if self.shape not in ('sphere', 'box'):
            raise ConfigurationError(f'unknown primitive shape {self.shape}',
                                     field='shape')
        if self.shape == 'box':
            self.size = np.broadcast_to(
                np.asarray(self.size, dtype=np.float64), (3,)
            ).copy()
        else:
            self.size = float(self.size)
        if self.density < 0:
            raise ConfigurationError('primitive density must be'
                                     f' nonnegative, got {self.density}',
                                     field='density')

    @property
    def half_extents(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.size, dtype=np.float64), (3,))

    def center_at(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64).reshape(-1, 1)
        return self.center + self.velocity * times

    def inside(self, points: np.ndarray, times: np.ndarray) -> np.ndarray:
        local = points - self.center_at(times)
        if self.shape == 'sphere':
            return np.sum(local * local, axis=-1) <= self.size ** 2
        return np.all(np.abs(local) <= self.half_extents, axis=-1)

    def emission(self, directions: np.ndarray) -> np.ndarray:
        """Colour `[P, 3]` seen along unit directions `[P, 3]`."""

        shift = self.anisotropy * (directions @ VIEW_AXIS)
        return np.clip(self.color + shift[:, None], 0.0, 1.0)

    def intersect(self, rays: RayBatch
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Entry and exit distances plus a hit mask, per ray."""

        center = self.center_at(rays.times)
        oc = rays.origins - center
        if self.shape == 'sphere':
            b = np.sum(rays.directions * oc, axis=-1)
            c = np.sum(oc * oc, axis=-1) - self.size ** 2
            disc = b * b - c
            root = np.sqrt(np.maximum(disc, 0.0))
            t_in, t_out = -b - root, -b + root
            hit = disc > 0.0
        else:
            with np.errstate(divide='ignore', invalid='ignore'):
                inv = 1.0 / rays.directions
                t0 = (-self.half_extents - oc) * inv
                t1 = (self.half_extents - oc) * inv
            t0 = np.where(np.isnan(t0), -np.inf, t0)
            t1 = np.where(np.isnan(t1), np.inf, t1)
            t_in = np.max(np.minimum(t0, t1), axis=-1)
            t_out = np.min(np.maximum(t0, t1), axis=-1)
            hit = t_out > t_in

        t_in = np.maximum(t_in, rays.near)
        t_out = np.minimum(t_out, rays.far)
        hit &= t_out > t_in
        return t_in, t_out, hit


@dataclass
class SyntheticSceneSpec:
    primitives: list[Primitive] = field(default_factory=list)
    background: np.ndarray = field(default_factory=lambda: WHITE.copy())
    seed: int = 0

    def __post_init__(self):
        self.background = np.asarray(self.background, dtype=np.float64)
        for i, prim in enumerate(self.primitives):
            for t in (0.0, 1.0):
                center = prim.center_at(np.array([t]))[0]
                lo = center - prim.half_extents
                hi = center + prim.half_extents
                if np.any(lo < BOX_MIN) or np.any(hi > BOX_MAX):
                    raise ConfigurationError(
                        f'primitive {i} leaves the unit box at t={t}',
                        field='primitives'
                    )

    @property
    def is_static(self) -> bool:
        return all(not np.any(prim.velocity) for prim in self.primitives)


class SyntheticScene:
    """The scene as a radiance field, so the volume renderer can
    integrate it numerically."""

    dtype = np.dtype(np.float64)

    def __init__(self, spec: SyntheticSceneSpec):
        self.spec = spec

    def _sigmas(self, points, times) -> tuple[np.ndarray, list[np.ndarray]]:
        points = np.asarray(getattr(points, 'data', points),
                            dtype=np.float64).reshape(-1, 3)
        times = np.broadcast_to(np.asarray(times, dtype=np.float64),
                                points.shape[:1])
        parts = [
            np.where(prim.inside(points, times), prim.density, 0.0)
                for prim
                in self.spec.primitives
        ]
        total = np.sum(parts, axis=0) if parts else np.zeros(len(points))
        return total, parts

    def density(self, points, times) -> Tensor:
        sigma, _ = self._sigmas(points, times)
        return Tensor.wrap(sigma.reshape(-1, 1))

    def __call__(self, points, times, dirs) -> tuple[Tensor, Tensor]:
        sigma, parts = self._sigmas(points, times)
        dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
        emitted = np.zeros((len(sigma), 3))
        for prim, part in zip(self.spec.primitives, parts):
            emitted += part[:, None] * prim.emission(dirs)
        with np.errstate(divide='ignore', invalid='ignore'):
            color = np.where(sigma[:, None] > 0.0,
                             emitted / sigma[:, None], 0.0)
        return Tensor.wrap(color), Tensor.wrap(sigma.reshape(-1, 1))


def closed_form_colors(spec: SyntheticSceneSpec, rays: RayBatch
                      ) -> np.ndarray:
    """Exact pixel colours `[R, 3]` of the emission-absorption integral.

    Overlapping primitives add their densities; their colours mix in
    proportion to density.
    """

    R = len(rays)
    background = np.broadcast_to(spec.background, (R, 3))
    if not spec.primitives:
        return background.copy()

    hits = [prim.intersect(rays) for prim in spec.primitives]
    emissions = [prim.emission(rays.directions) for prim in spec.primitives]
    bounds = np.concatenate([
        np.stack([np.where(hit, t_in, rays.far), np.where(hit, t_out,
                                                          rays.far)])
            for t_in, t_out, hit
            in hits
    ]).T
    bounds = np.sort(bounds, axis=-1)

    transmittance = np.ones(R)
    color = np.zeros((R, 3))
    for j in range(bounds.shape[1] - 1):
        a, b = bounds[:, j], bounds[:, j + 1]
        length = b - a
        mid = 0.5 * (a + b)
        sigma = np.zeros(R)
        emitted = np.zeros((R, 3))
        for prim, (t_in, t_out, hit), emission in zip(spec.primitives, hits,
                                                      emissions):
            active = hit & (length > 0.0) & (t_in <= mid) & (mid <= t_out)
            part = np.where(active, prim.density, 0.0)
            sigma += part
            emitted += part[:, None] * emission
        with np.errstate(divide='ignore', invalid='ignore'):
            seg_color = np.where(sigma[:, None] > 0.0,
                                 emitted / sigma[:, None], 0.0)
        absorbed = 1.0 - np.exp(-sigma * length)
        color += (transmittance * absorbed)[:, None] * seg_color
        transmittance = transmittance * np.exp(-sigma * length)
    return color + transmittance[:, None] * background


def render_synthetic(spec: SyntheticSceneSpec,
                     camera: Camera,
                     time: float,
                     n_quadrature: int | None=None,
                     chunk_size: int=4096) -> np.ndarray:
    """Ground-truth `[H, W, 3]` image.

    With `n_quadrature` the scene's own density and colour are integrated
    by the volume renderer with that many samples per ray instead.
    """

    if n_quadrature is not None:
        return render_image(SyntheticScene(spec), camera, time,
                            n_quadrature, spec.background,
                            chunk_size=chunk_size)
    rays = generate_rays(camera, time=time)
    colors = closed_form_colors(spec, rays)
    return colors.reshape(camera.height, camera.width, 3)


def quantize(image: np.ndarray) -> np.ndarray:
    """Rounds to the nearest 8-bit level, returned as float."""

    return np.clip(np.round(image * 255.0), 0, 255) / 255.0


def sample_pose(rng: np.random.Generator,
                distance: float=DEFAULT_CAMERA_DISTANCE) -> np.ndarray:
    """Pose on a sphere around the origin, looking at the origin."""

    azimuth = rng.uniform(0.0, 2.0 * np.pi)
    elevation = rng.uniform(-np.pi / 12.0, np.pi / 3.0)
    eye = distance * np.array([
        np.cos(elevation) * np.cos(azimuth),
        np.cos(elevation) * np.sin(azimuth),
        np.sin(elevation)
    ])
    return look_at(eye)


def make_synthetic_dataset(spec: SyntheticSceneSpec,
                           n_train: int=20,
                           n_test: int=5,
                           resolution: int=64,
                           out_dir: str | None=None,
                           camera_angle_x: float=DEFAULT_CAMERA_ANGLE_X,
                           distance: float=DEFAULT_CAMERA_DISTANCE
                          ) -> dict[str, DynamicDataset]:
    """Renders train, val and test splits of `spec`.

    Val and test both hold `n_test` frames. Images are quantised to 8
    bits so a written dataset loads back bit-identically.
    """

    if n_train < 1 or n_test < 0 or resolution < 1:
        raise ConfigurationError(
            f'invalid synthetic dataset size: n_train={n_train},'
            f' n_test={n_test}, resolution={resolution}'
        )
    rng = np.random.default_rng(spec.seed)
    sizes = {'train': n_train, 'val': n_test, 'test': n_test}
    datasets = {}
    for split in SPLITS:
        frames = []
        for i in tqdm(range(sizes[split]), desc=f'rendering {split}',
                      disable=None):
            pose = sample_pose(rng, distance)
            time = float(rng.uniform(0.0, 1.0))
            camera = Camera.from_fov(camera_angle_x, resolution, resolution,
                                     pose)
            image = quantize(render_synthetic(spec, camera, time))
            frames.append(Frame(image, pose, time, f'./{split}/r_{i:03d}'))
        datasets[split] = DynamicDataset(frames, camera_angle_x, split,
                                         background=spec.background.copy())
        if out_dir is not None and frames:
            write_dnerf(datasets[split], out_dir)
    logger.info(f'made synthetic dataset with {n_train} train and {n_test}'
                f' val/test frames at {resolution}x{resolution}')
    return datasets


def _moving_sphere(seed: int) -> SyntheticSceneSpec:
    return SyntheticSceneSpec([
        Primitive('sphere', [-0.1, 0.0, 0.0], 0.3, [0.85, 0.3, 0.2], 30.0,
                  velocity=[0.2, 0.0, 0.0])
    ], seed=seed)


def _static_sphere(seed: int) -> SyntheticSceneSpec:
    return SyntheticSceneSpec([
        Primitive('sphere', [0.0, 0.0, 0.0], 0.3, [0.85, 0.3, 0.2], 30.0)
    ], seed=seed)


def _two_primitives(seed: int) -> SyntheticSceneSpec:
    return SyntheticSceneSpec([
        Primitive('sphere', [-0.4, -0.1, 0.0], 0.25, [0.9, 0.25, 0.2], 30.0,
                  velocity=[0.0, 0.2, 0.0]),
        Primitive('box', [0.45, 0.0, 0.0], [0.2, 0.2, 0.2],
                  [0.2, 0.4, 0.9], 30.0)
    ], seed=seed)


def _anisotropic_sphere(seed: int) -> SyntheticSceneSpec:
    return SyntheticSceneSpec([
        Primitive('sphere', [0.0, 0.0, 0.0], 0.35, [0.5, 0.5, 0.5], 30.0,
                  anisotropy=0.3)
    ], seed=seed)


PRESETS: dict[str, Callable[[int], SyntheticSceneSpec]] = {
    'moving-sphere': _moving_sphere,
    'static-sphere': _static_sphere,
    'two-primitives': _two_primitives,
    'anisotropic-sphere': _anisotropic_sphere
}


def get_preset(name: str, seed: int=0) -> SyntheticSceneSpec:
    try:
        return PRESETS[name](seed)
    except KeyError:
        raise ConfigurationError(
            f'unknown preset {name}, expected one of {sorted(PRESETS)}',
            field='preset'
        )
