"""Image files written by the renderer and the probes.

Raw dumps use a little-endian layout: u32 height, u32 width, then
height * width * 3 float32 values in row-major RGB order.
"""

from __future__ import annotations
import os
import struct
import logging

import numpy as np
from PIL import Image

from src.exceptions import DataError


logger = logging.getLogger(__name__)


_RAW_HEADER = struct.Struct('<II')


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(image) * 255.0), 0, 255) \
        .astype(np.uint8)


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_png(path: str, image: np.ndarray) -> str:
    """Writes an `[H, W, 3]` or `[H, W]` image in [0, 1] as 8-bit PNG."""

    _ensure_parent(path)
    Image.fromarray(to_uint8(image)).save(path, format='PNG')
    logger.info(f'wrote {path}')
    return path


def read_png(path: str) -> np.ndarray:
    """Reads a PNG as uint8 RGBA `[H, W, 4]` (RGB files get alpha 255)."""

    try:
        with Image.open(path) as image:
            return np.asarray(image.convert('RGBA'))
    except (OSError, ValueError) as err:
        raise DataError(f'cannot read image {path}: {err}', file_name=path) \
            from err


def write_raw(path: str, image: np.ndarray) -> str:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DataError(f'expected an [H, W, 3] image, got {image.shape}',
                        file_name=path)

    _ensure_parent(path)
    height, width = image.shape[:2]
    with open(path, 'wb') as fp:
        fp.write(_RAW_HEADER.pack(height, width))
        fp.write(image.astype('<f4').tobytes(order='C'))
    logger.info(f'wrote {path}')
    return path


def read_raw(path: str) -> np.ndarray:
    with open(path, 'rb') as fp:
        blob = fp.read()
    if len(blob) < _RAW_HEADER.size:
        raise DataError(f'{path} is too short for a raw image header',
                        file_name=path)

    height, width = _RAW_HEADER.unpack_from(blob)
    expected = _RAW_HEADER.size + height * width * 3 * 4
    if len(blob) != expected:
        raise DataError(f'{path} holds {len(blob)} bytes, expected {expected}',
                        file_name=path)
    data = np.frombuffer(blob, dtype='<f4', offset=_RAW_HEADER.size)
    return data.reshape(height, width, 3).astype(np.float32)
