__all__ = [
    'LatentCodebook',
    'TrilinearGridField',
    'grid_interpolate',
    'trilinear_coordinates',
    'AttentionInterpolator',
    'attend',
    'InterpolatorDecoder',
    'DensityHead',
    'ColorHead',
    'RadianceChannel',
    'RadianceField',
    'radiance',
    'CHANNELS'
]


from src.radiance.codebook import (
    LatentCodebook,
    TrilinearGridField,
    grid_interpolate,
    trilinear_coordinates
)
from src.radiance.attention import AttentionInterpolator, attend
from src.radiance.decoder import InterpolatorDecoder, DensityHead, ColorHead
from src.radiance.field import (
    RadianceChannel,
    RadianceField,
    radiance,
    CHANNELS
)
