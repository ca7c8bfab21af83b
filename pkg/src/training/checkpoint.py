"""Single-file checkpoints.

Layout, all integers little-endian:

    8 bytes   magic b'SLS4DCKP'
    u32       format version
    u32       header length in bytes
    u32       CRC-32 of the header bytes
    header    UTF-8 JSON: config, step, adam_t, rng_state, extra,
              payload_sha256
              and a manifest of {name, kind, shape, dtype, offset, nbytes}
    payload   raw little-endian arrays in manifest order
"""

from __future__ import annotations
import os
import json
import zlib
import struct
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.exceptions import IntegrityError, VersionError


logger = logging.getLogger(__name__)


MAGIC = b'SLS4DCKP'
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct('<8sIII')


@dataclass
class Checkpoint:
    config: dict[str, Any]
    step: int
    params: dict[str, np.ndarray]
    moments: dict[str, np.ndarray] = field(default_factory=dict)
    occupancy: np.ndarray | None = None
    rng_state: dict[str, Any] | None = None
    adam_t: int = 0
    extra: dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION


def _little_endian(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    return array.astype(array.dtype.newbyteorder('<'), copy=False)


def _entries(ckpt: Checkpoint) -> list[tuple[str, str, np.ndarray]]:
    entries = [(name, 'param', value) for name, value in ckpt.params.items()]
    entries += [(name, 'moment', value)
                for name, value in ckpt.moments.items()]
    if ckpt.occupancy is not None:
        entries.append(('occupancy', 'occupancy',
                        np.asarray(ckpt.occupancy, dtype=np.uint8)))
    return entries


def save_checkpoint(path: str, ckpt: Checkpoint) -> str:
    """Writes `ckpt` to `path`, replacing any existing file atomically."""

    manifest = []
    chunks = []
    offset = 0
    for name, kind, value in _entries(ckpt):
        data = _little_endian(np.asarray(value))
        raw = data.tobytes(order='C')
        manifest.append({
            'name': name,
            'kind': kind,
            'shape': list(data.shape),
            'dtype': data.dtype.str,
            'offset': offset,
            'nbytes': len(raw)
        })
        chunks.append(raw)
        offset += len(raw)
    payload = b''.join(chunks)

    header = json.dumps({
        'config': ckpt.config,
        'step': ckpt.step,
        'adam_t': ckpt.adam_t,
        'rng_state': ckpt.rng_state,
        'extra': ckpt.extra,
        'payload_sha256': hashlib.sha256(payload).hexdigest(),
        'manifest': manifest
    }).encode('utf-8')

    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp_path = f'{path}.tmp'
    with open(tmp_path, 'wb') as fp:
        fp.write(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header),
                                zlib.crc32(header)))
        fp.write(header)
        fp.write(payload)
    os.replace(tmp_path, path)
    logger.info(f'saved checkpoint at step {ckpt.step} to {path}'
                f' ({len(payload)} payload bytes)')
    return path


def _corrupt(path: str, reason: str) -> IntegrityError:
    logger.error(f'checkpoint {path} failed its integrity check: {reason}')
    return IntegrityError(f'checkpoint {path} is corrupt: {reason}')


def load_checkpoint(path: str) -> Checkpoint:
    """Reads a checkpoint written by `save_checkpoint`.

    Nothing is returned unless the magic, version, header checksum and
    payload digest all match.
    """

    with open(path, 'rb') as fp:
        blob = fp.read()
    if len(blob) < _PREAMBLE.size:
        raise _corrupt(path, 'file is shorter than the preamble')

    magic, version, header_len, header_crc = _PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise _corrupt(path, 'bad magic bytes')
    if version != FORMAT_VERSION:
        logger.error(f'checkpoint {path} has format version {version}')
        raise VersionError(found=version, expected=FORMAT_VERSION)

    start = _PREAMBLE.size
    header_bytes = blob[start:start + header_len]
    if len(header_bytes) != header_len:
        raise _corrupt(path, 'truncated header')
    if zlib.crc32(header_bytes) != header_crc:
        raise _corrupt(path, 'header checksum mismatch')
    try:
        header = json.loads(header_bytes.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise _corrupt(path, f'unreadable header ({err})') from err

    if not isinstance(header, dict):
        raise _corrupt(path, 'header is not a JSON object')
    for key in ('payload_sha256', 'manifest', 'config', 'step'):
        if key not in header:
            raise _corrupt(path, f'header has no "{key}"')

    payload = blob[start + header_len:]
    if hashlib.sha256(payload).hexdigest() != header.get('payload_sha256'):
        raise _corrupt(path, 'payload digest mismatch (truncated file?)')

    params: dict[str, np.ndarray] = {}
    moments: dict[str, np.ndarray] = {}
    occupancy = None
    for entry in header['manifest']:
        lo = entry['offset']
        raw = payload[lo:lo + entry['nbytes']]
        value = np.frombuffer(raw, dtype=np.dtype(entry['dtype'])) \
            .reshape(entry['shape'])
        value = value.astype(value.dtype.newbyteorder('='))
        match entry['kind']:
            case 'param':
                params[entry['name']] = value
            case 'moment':
                moments[entry['name']] = value
            case 'occupancy':
                occupancy = value
            case other:
                raise _corrupt(path, f'unknown manifest entry kind {other}')

    logger.info(f'loaded checkpoint {path} at step {header["step"]}')
    return Checkpoint(
        config=header['config'],
        step=header['step'],
        params=params,
        moments=moments,
        occupancy=occupancy,
        rng_state=header.get('rng_state'),
        adam_t=header.get('adam_t', 0),
        extra=header.get('extra', {}),
        version=version
    )
