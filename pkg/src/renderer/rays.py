"""Pinhole cameras and ray batches.

Cameras follow the D-NeRF / Blender convention: the camera looks down
its local -z axis with +y up, and poses are camera-to-world matrices.
"""

from __future__ import annotations
import math
import logging
from dataclasses import dataclass

import numpy as np

from src.exceptions import DataError


logger = logging.getLogger(__name__)


BOX_MIN = -1.0
BOX_MAX = 1.0


def look_at(eye: np.ndarray,
            target: np.ndarray=np.zeros(3),
            up: np.ndarray=np.array([0.0, 0.0, 1.0])) -> np.ndarray:
    """Camera-to-world pose at `eye` looking towards `target`."""

    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, up)
    if np.linalg.norm(right) < 1e-8:
        right = np.cross(forward, np.array([0.0, 1.0, 0.0]))
    right /= np.linalg.norm(right)
    true_up = np.cross(right, forward)

    pose = np.eye(4)
    pose[:3, 0] = right
    pose[:3, 1] = true_up
    pose[:3, 2] = -forward
    pose[:3, 3] = eye
    return pose


@dataclass
class Camera:
    pose: np.ndarray
    width: int
    height: int
    focal: float

    @classmethod
    def from_fov(cls,
                 camera_angle_x: float,
                 width: int,
                 height: int,
                 pose: np.ndarray) -> Camera:
        focal = 0.5 * width / math.tan(0.5 * camera_angle_x)
        return cls(np.asarray(pose, dtype=np.float64), width, height, focal)

    @property
    def camera_angle_x(self) -> float:
        return 2.0 * math.atan(0.5 * self.width / self.focal)

    def pixel_grid(self) -> np.ndarray:
        """All pixel coordinates `(x, y)` in row-major order."""

        ys, xs = np.meshgrid(np.arange(self.height), np.arange(self.width),
                             indexing='ij')
        return np.stack([xs.reshape(-1), ys.reshape(-1)], axis=-1)


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    near: float
    far: float
    time: float
    target_color: np.ndarray | None = None


@dataclass
class RayBatch:
    origins: np.ndarray
    directions: np.ndarray
    near: np.ndarray
    far: np.ndarray
    times: np.ndarray
    targets: np.ndarray | None = None

    def __len__(self) -> int:
        return self.origins.shape[0]

    def __getitem__(self, index) -> RayBatch:
        return RayBatch(
            self.origins[index],
            self.directions[index],
            self.near[index],
            self.far[index],
            self.times[index],
            None if self.targets is None else self.targets[index]
        )

    def ray(self, i: int) -> Ray:
        return Ray(self.origins[i], self.directions[i], float(self.near[i]),
                   float(self.far[i]), float(self.times[i]),
                   None if self.targets is None else self.targets[i])

    @classmethod
    def from_rays(cls, rays: list[Ray]) -> RayBatch:
        targets = None
        if rays and all(ray.target_color is not None for ray in rays):
            targets = np.stack([ray.target_color for ray in rays])
        return cls(
            np.stack([ray.origin for ray in rays]),
            np.stack([ray.direction for ray in rays]),
            np.array([ray.near for ray in rays]),
            np.array([ray.far for ray in rays]),
            np.array([ray.time for ray in rays]),
            targets
        )


def box_intersect(origins: np.ndarray, directions: np.ndarray
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entry/exit distances of rays through the normalised box.

    Returns `(near, far, hit)`; near is clamped at 0 for origins inside
    the box and missing rays get near = 0, far = 1.
    """

    with np.errstate(divide='ignore', invalid='ignore'):
        inv = 1.0 / directions
        t0 = (BOX_MIN - origins) * inv
        t1 = (BOX_MAX - origins) * inv
    t0 = np.where(np.isnan(t0), -np.inf, t0)
    t1 = np.where(np.isnan(t1), np.inf, t1)
    t_lo = np.minimum(t0, t1)
    t_hi = np.maximum(t0, t1)
    near = np.maximum(np.max(t_lo, axis=-1), 0.0)
    far = np.min(t_hi, axis=-1)
    hit = far > near
    near = np.where(hit, near, 0.0)
    far = np.where(hit, far, 1.0)
    return near, far, hit


def _check_pose(pose: np.ndarray) -> np.ndarray:
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape != (4, 4) or not np.all(np.isfinite(pose)):
        raise DataError(f'camera pose must be a finite 4x4 matrix,'
                        f' got shape {pose.shape}')
    if abs(np.linalg.det(pose[:3, :3])) < 1e-8:
        logger.error('camera pose is not invertible')
        raise DataError('camera pose is not invertible')
    return pose


def rays_from_poses(poses: np.ndarray,
                    width: int,
                    height: int,
                    focal: float,
                    pixels: np.ndarray,
                    times: np.ndarray | float,
                    targets: np.ndarray | None=None) -> RayBatch:
    """Rays for pixels `(x, y)` seen by per-ray poses `[R, 4, 4]`."""

    poses = np.asarray(poses, dtype=np.float64).reshape(-1, 4, 4)
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    local = np.stack([
        (pixels[:, 0] + 0.5 - 0.5 * width) / focal,
        -(pixels[:, 1] + 0.5 - 0.5 * height) / focal,
        -np.ones(pixels.shape[0])
    ], axis=-1)
    directions = np.einsum('rij,rj->ri', poses[:, :3, :3], local)
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    origins = np.ascontiguousarray(poses[:, :3, 3])
    near, far, _ = box_intersect(origins, directions)
    times = np.broadcast_to(np.asarray(times, dtype=np.float64),
                            (pixels.shape[0],)).copy()
    return RayBatch(origins, directions, near, far, times, targets)


def generate_rays(camera: Camera,
                  pixels: np.ndarray | None=None,
                  time: float | np.ndarray=0.0,
                  targets: np.ndarray | None=None) -> RayBatch:
    """One ray per pixel `(x, y)`; every pixel when `pixels` is None.

    Directions go through pixel centres and are normalised; near and far
    come from the intersection with the normalised scene box.
    """

    pose = _check_pose(camera.pose)
    if pixels is None:
        pixels = camera.pixel_grid()
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    poses = np.broadcast_to(pose, (pixels.shape[0], 4, 4))
    return rays_from_poses(poses, camera.width, camera.height, camera.focal,
                           pixels, time, targets)
