from __future__ import annotations
from typing import Literal

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.layers import Linear, GeGLU, Sequential
from src.autodiff.parameters import ParameterStore
from src.exceptions import ConfigurationError


DecoderVariant = Literal['geglu', 'gelu', 'mlp']


class InterpolatorDecoder:
    """Four layers lifting an interpolated feature to the decoder width.

    Layers 1-3 belong to `mlp_early`, layer 4 to `mlp_late`. The second
    layer is a GeGLU unless the `gelu` or `mlp` variant is selected; the
    `mlp` variant uses ReLU everywhere.
    """

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_in: int,
                 width: int,
                 d_out: int,
                 variant: DecoderVariant='geglu'):
        self.variant = variant
        self.d_out = d_out
        act = 'relu' if variant == 'mlp' else 'gelu'

        match variant:
            case 'geglu':
                second = GeGLU(store, f'{name}.1', width, width, 'mlp_early')
            case 'gelu' | 'mlp':
                second = Linear(store, f'{name}.1', width, width,
                                'mlp_early', activation=act)
            case other:
                raise ConfigurationError(f'unknown decoder variant: {other}',
                                         field='ablation.decoder')

        self.layers = Sequential([
            Linear(store, f'{name}.0', d_in, width, 'mlp_early',
                   activation=act),
            second,
            Linear(store, f'{name}.2', width, width, 'mlp_early',
                   activation=act),
            Linear(store, f'{name}.3', width, d_out, 'mlp_late',
                   activation=act)
        ])

    def __call__(self, feature: Tensor) -> Tensor:
        return self.layers(feature)


class DensityHead:
    """Three layers to one value, softplus keeps sigma nonnegative."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_in: int,
                 width: int,
                 zero_init: bool=False):
        self.layers = Sequential([
            Linear(store, f'{name}.0', d_in, width, 'mlp_late',
                   activation='relu'),
            Linear(store, f'{name}.1', width, width, 'mlp_late',
                   activation='relu'),
            Linear(store, f'{name}.2', width, 1, 'mlp_late', zero=zero_init)
        ])

    def __call__(self, feature: Tensor) -> Tensor:
        return ops.softplus(self.layers(feature))


class ColorHead:
    """One layer on feature + encoded view direction, sigmoid to [0, 1]."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_in: int,
                 zero_init: bool=False):
        self.layer = Linear(store, f'{name}.0', d_in, 3, 'mlp_late',
                            activation='sigmoid', zero=zero_init)

    def __call__(self, feature: Tensor, view_enc: Tensor) -> Tensor:
        return self.layer(ops.concat([feature, view_enc], axis=-1))
