"""SLS4D: sparse latent space engine for dynamic novel view synthesis"""

__version__ = '0.3.0'
__all__ = [
    'autodiff',
    'encoding',
    'deformation',
    'radiance',
    'model',
    'renderer',
    'training',
    'data',
    'diagnostics'
]

import os
import logging


logging.basicConfig(
    filename='sls4d.log',
    level=logging.INFO,
    format='%(asctime)s %(levelname)s %(name)s: %(message)s'
)


_ROOT = os.path.abspath(os.path.dirname(__file__))


def get_path(*path_fragments: str) -> str:
    file_path = os.path.join(_ROOT, *path_fragments)
    if not os.path.exists(file_path):
        raise FileNotFoundError(f'No file with the path {file_path} exists')

    return file_path
