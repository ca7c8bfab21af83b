"""D-NeRF style dynamic datasets.

A split lives in `transforms_{split}.json`:

    {
        "camera_angle_x": float,
        "scene_center": [x, y, z],        (optional)
        "scene_scale": float,             (optional)
        "frames": [
            {"file_path": "./train/r_000", "transform_matrix": 4x4,
             "time": float},
            ...
        ]
    }

Images are PNG files, RGBA images being composited over the configured
background on load.
"""

from __future__ import annotations
import os
import json
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Literal

import numpy as np
from tqdm import tqdm

from src.config import app_config
from src.exceptions import DataError, ConfigurationError
from src.renderer.rays import Camera, RayBatch, rays_from_poses
from src.renderer.images import read_png, write_png


logger = logging.getLogger(__name__)


Split = Literal['train', 'val', 'test']
SPLITS: tuple[Split, ...] = ('train', 'val', 'test')

WHITE = np.ones(3)
BLACK = np.zeros(3)

NORMALIZATION_MARGIN = 1.1


@dataclass
class SceneNormalization:
    """Maps world positions into the unit box: (x - center) * scale."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def apply(self, pose: np.ndarray) -> np.ndarray:
        pose = np.array(pose, dtype=np.float64)
        pose[:3, 3] = (pose[:3, 3] - self.center) * self.scale
        return pose

    def to_json(self) -> dict[str, Any]:
        return {
            'scene_center': [float(v) for v in self.center],
            'scene_scale': float(self.scale)
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> SceneNormalization:
        return cls(np.asarray(obj['scene_center'], dtype=np.float64),
                   float(obj['scene_scale']))


@dataclass
class Frame:
    image: np.ndarray
    pose: np.ndarray
    time: float
    file_path: str
    raw_pose: np.ndarray | None = None

    def __post_init__(self):
        if self.raw_pose is None:
            self.raw_pose = np.array(self.pose, dtype=np.float64)


@dataclass
class DynamicDataset:
    frames: list[Frame]
    camera_angle_x: float
    split: Split = 'train'
    normalization: SceneNormalization = field(
        default_factory=SceneNormalization
    )
    background: np.ndarray = field(default_factory=lambda: WHITE.copy())

    def __post_init__(self):
        shapes = {frame.image.shape for frame in self.frames}
        if len(shapes) > 1:
            raise DataError(f'frames of the {self.split} split have'
                            f' different resolutions: {sorted(shapes)}')
        for frame in self.frames:
            if not 0.0 <= frame.time <= 1.0:
                raise DataError(f'frame time {frame.time} is outside [0, 1]',
                                file_name=frame.file_path)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return self.frames[0].image.shape[0]

    @property
    def width(self) -> int:
        return self.frames[0].image.shape[1]

    @property
    def focal(self) -> float:
        return 0.5 * self.width / math.tan(0.5 * self.camera_angle_x)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([frame.time for frame in self.frames])

    @cached_property
    def poses(self) -> np.ndarray:
        return np.stack([frame.pose for frame in self.frames])

    @cached_property
    def images(self) -> np.ndarray:
        return np.stack([frame.image for frame in self.frames])

    def camera(self, index: int) -> Camera:
        return Camera(self.frames[index].pose, self.width, self.height,
                      self.focal)

    def rays(self, frame_index: np.ndarray, pixels: np.ndarray) -> RayBatch:
        """Rays with targets for pixels `(x, y)` of the given frames."""

        frame_index = np.asarray(frame_index, dtype=np.intp)
        pixels = np.asarray(pixels, dtype=np.intp).reshape(-1, 2)
        poses = self.poses[frame_index]
        times = self.times[frame_index]
        targets = self.images[frame_index, pixels[:, 1], pixels[:, 0]]
        return rays_from_poses(poses, self.width, self.height, self.focal,
                               pixels, times, targets)


def composite_rgba(rgba: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Float RGB image from uint8 RGBA composited over `background`."""

    rgba = np.asarray(rgba, dtype=np.float64) / 255.0
    rgb, alpha = rgba[..., :3], rgba[..., 3:]
    return rgb * alpha + np.asarray(background) * (1.0 - alpha)


def box_downscale(image: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return image
    H = image.shape[0] // factor * factor
    W = image.shape[1] // factor * factor
    image = image[:H, :W]
    return image.reshape(H // factor, factor, W // factor, factor, -1) \
        .mean(axis=(1, 3))


def closest_point_2_lines(oa: np.ndarray, da: np.ndarray,
                          ob: np.ndarray, db: np.ndarray
                         ) -> tuple[np.ndarray, float]:
    """Point closest to two lines o + t d, weighted by how far from
    parallel they are."""

    da = da / np.linalg.norm(da)
    db = db / np.linalg.norm(db)
    c = np.cross(da, db)
    denom = float(np.linalg.norm(c) ** 2)
    t = ob - oa
    ta = np.linalg.det(np.stack([t, db, c])) / (denom + 1e-10)
    tb = np.linalg.det(np.stack([t, da, c])) / (denom + 1e-10)
    ta = max(ta, 0.0)
    tb = max(tb, 0.0)
    return (oa + ta * da + ob + tb * db) * 0.5, denom


def estimate_normalization(poses: np.ndarray,
                           camera_angle_x: float) -> SceneNormalization:
    """Centre where the optical axes meet, scale from the frustum width.

    The visible half-width at the centre's depth, grown by a 10% margin,
    is mapped to 1.
    """

    origins = poses[:, :3, 3]
    axes = -poses[:, :3, 2]
    total = np.zeros(3)
    weight = 0.0
    for i in range(len(poses)):
        for j in range(i + 1, len(poses)):
            point, w = closest_point_2_lines(origins[i], axes[i],
                                             origins[j], axes[j])
            if w > 1e-5:
                total += point * w
                weight += w
    center = total / weight if weight > 0.0 else np.zeros(3)

    distance = float(np.mean(np.linalg.norm(origins - center, axis=-1)))
    half_width = distance * math.tan(0.5 * camera_angle_x)
    if not half_width > 0.0:
        raise DataError('cannot normalise a scene whose cameras sit at'
                        ' its centre')
    scale = 1.0 / (NORMALIZATION_MARGIN * half_width)
    logger.info(f'estimated scene centre {center.round(4).tolist()},'
                f' scale {scale:.4f}')
    return SceneNormalization(center, scale)


def _read_transforms(directory: str, split: str) -> tuple[str, dict]:
    path = os.path.join(directory, f'transforms_{split}.json')
    if not os.path.isfile(path):
        raise DataError(f'no transforms file at {path}', file_name=path)
    try:
        with open(path, 'r') as fp:
            return path, json.load(fp)
    except json.JSONDecodeError as err:
        raise DataError(f'{path} is not valid JSON: {err}',
                        file_name=path) from err


def _require(obj: dict, key: str, file_name: str) -> Any:
    try:
        return obj[key]
    except KeyError:
        logger.error(f'{file_name} has no {key} entry')
        raise DataError(f'{file_name} has no "{key}" entry',
                        file_name=file_name)


def _image_path(directory: str, file_path: str) -> str:
    path = os.path.normpath(os.path.join(directory, file_path))
    if not os.path.splitext(path)[1] or not os.path.exists(path):
        if os.path.exists(f'{path}.png'):
            return f'{path}.png'
    return path


def load_dnerf(directory: str,
               split: Split='train',
               background: np.ndarray | None=None,
               downscale: int=1,
               normalization: SceneNormalization | None=None
              ) -> DynamicDataset:
    """Loads one split of a D-NeRF style dataset.

    Without an explicit `normalization` the one stored in the JSON is
    used, else one is estimated from the split's own poses. Splits other
    than train should be given the train split's normalization so every
    split maps world positions into the box the same way.
    """

    if downscale < 1:
        raise ConfigurationError(f'downscale must be at least 1, got'
                                 f' {downscale}', field='dataset.downscale')
    background = WHITE if background is None else np.asarray(background)
    path, transforms = _read_transforms(directory, split)
    camera_angle_x = float(_require(transforms, 'camera_angle_x', path))
    frames_json = _require(transforms, 'frames', path)
    if not frames_json:
        raise DataError(f'{path} lists no frames', file_name=path)

    raw_poses = []
    times = []
    files = []
    for frame in frames_json:
        file_path = _require(frame, 'file_path', path)
        pose = np.asarray(_require(frame, 'transform_matrix', path),
                          dtype=np.float64)
        if pose.shape != (4, 4):
            raise DataError(f'{path}: transform_matrix of {file_path} is not'
                            ' 4x4', file_name=path)
        if 'time' not in frame:
            logger.error(f'{path}: frame {file_path} has no time')
            raise DataError(f'{path}: frame {file_path} has no "time"; only'
                            ' dynamic scenes are supported', file_name=path)
        raw_poses.append(pose)
        times.append(float(frame['time']))
        files.append(_image_path(directory, file_path))

    if normalization is None:
        if 'scene_center' in transforms and 'scene_scale' in transforms:
            normalization = SceneNormalization.from_json(transforms)
        else:
            normalization = estimate_normalization(np.stack(raw_poses),
                                                   camera_angle_x)

    def load_image(file_name: str) -> np.ndarray:
        if not os.path.isfile(file_name):
            raise DataError(f'missing image {file_name}', file_name=file_name)
        image = composite_rgba(read_png(file_name), background)
        return box_downscale(image, downscale)

    with ThreadPoolExecutor(max_workers=app_config.threads) as executor:
        images = list(tqdm(executor.map(load_image, files),
                           total=len(files),
                           desc=f'loading {split} images',
                           disable=None))

    frames = [
        Frame(image, normalization.apply(pose), time, file_name, pose)
            for image, pose, time, file_name
            in zip(images, raw_poses, times, files)
    ]
    dataset = DynamicDataset(frames, camera_angle_x, split, normalization,
                             np.array(background, dtype=np.float64))
    logger.info(f'loaded {len(dataset)} {split} frames of'
                f' {dataset.width}x{dataset.height} from {directory}')
    return dataset


def write_dnerf(dataset: DynamicDataset, directory: str) -> str:
    """Writes `dataset` in the layout `load_dnerf` reads.

    Images are stored as 8-bit RGB PNG, frame `i` at
    `./{split}/r_{i:03d}.png`. Returns the transforms file path.
    """

    split = dataset.split
    os.makedirs(os.path.join(directory, split), exist_ok=True)
    frames_json = []
    for i, frame in enumerate(dataset.frames):
        rel_path = f'./{split}/r_{i:03d}'
        write_png(os.path.join(directory, f'{rel_path}.png'), frame.image)
        frames_json.append({
            'file_path': rel_path,
            'transform_matrix': np.asarray(frame.raw_pose).tolist(),
            'time': float(frame.time)
        })

    transforms = {
        'camera_angle_x': float(dataset.camera_angle_x),
        **dataset.normalization.to_json(),
        'frames': frames_json
    }
    path = os.path.join(directory, f'transforms_{split}.json')
    with open(path, 'w') as fp:
        json.dump(transforms, fp, indent=4)
    logger.info(f'wrote {len(dataset)} {split} frames to {directory}')
    return path
