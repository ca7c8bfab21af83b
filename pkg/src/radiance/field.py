from __future__ import annotations
import logging

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.layers import Linear
from src.autodiff.parameters import ParameterStore
from src.config import ModelConfig, AblationConfig
from src.encoding import FrequencyEncoderConfig, encode
from src.radiance.codebook import LatentCodebook, TrilinearGridField
from src.radiance.attention import AttentionInterpolator
from src.radiance.decoder import InterpolatorDecoder, DensityHead, ColorHead


logger = logging.getLogger(__name__)


CHANNELS = ('density', 'color')


class RadianceChannel:
    """Feature source plus interpolator decoder for one output channel."""

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 cfg: ModelConfig,
                 ablation: AblationConfig,
                 d_query_in: int,
                 source: LatentCodebook | TrilinearGridField):
        self.source = source
        self.interp: AttentionInterpolator | None = None
        self.merge: Linear | None = None
        if isinstance(source, LatentCodebook):
            self.interp = AttentionInterpolator(
                store, f'{name}.attention', d_query_in, cfg.F, cfg.heads,
                cfg.d_h, cfg.decoder_width,
                literal_scaling=ablation.literal_attention_scaling
            )
        else:
            self.merge = Linear(store, f'{name}.merge', cfg.F,
                                cfg.decoder_width, 'mlp_early')
        self.decoder = InterpolatorDecoder(store, f'{name}.decoder',
                                           cfg.decoder_width,
                                           cfg.decoder_width,
                                           cfg.decoder_out,
                                           variant=ablation.decoder)

    def __call__(self, query_enc: Tensor, points: Tensor) -> Tensor:
        if self.interp is not None:
            feature = self.interp(query_enc, self.source.codes)
        else:
            feature = self.merge(self.source(points))
        return self.decoder(feature)

    def attention_weights(self, query_enc: Tensor) -> Tensor | None:
        if self.interp is None:
            return None
        return self.interp.weights(query_enc, self.source.codes)


class RadianceField:
    """Maps deformed points and view directions to colour and density.

    Density and colour run through separate channels, each attending
    over its own codebook unless `shared_codebook` is set. With
    `feature_space = grid` the codebook is replaced by a dense trilinear
    grid.
    """

    def __init__(self,
                 store: ParameterStore,
                 cfg: ModelConfig,
                 ablation: AblationConfig):
        self.cfg = cfg
        self.query_with_time = cfg.query_with_time
        self.space_encoder = FrequencyEncoderConfig(cfg.L_spatial,
                                                    cfg.include_input)
        self.time_encoder = FrequencyEncoderConfig(cfg.L_time,
                                                   cfg.include_input)
        self.view_encoder = FrequencyEncoderConfig(cfg.L_view,
                                                   cfg.include_input)
        d_query_in = self.space_encoder.output_dim(3)
        if self.query_with_time:
            d_query_in += self.time_encoder.output_dim(1)

        sources = self._build_sources(store, cfg, ablation)
        self.channels = {
            channel: RadianceChannel(store, f'radiance.{channel}', cfg,
                                     ablation, d_query_in, sources[channel])
                for channel
                in CHANNELS
        }
        self.density_head = DensityHead(store, 'radiance.density_head',
                                        cfg.decoder_out, cfg.density_width,
                                        zero_init=cfg.zero_init_heads)
        self.color_head = ColorHead(
            store, 'radiance.color_head',
            cfg.decoder_out + self.view_encoder.output_dim(3),
            zero_init=cfg.zero_init_heads
        )

    @staticmethod
    def _build_sources(store: ParameterStore,
                       cfg: ModelConfig,
                       ablation: AblationConfig
                      ) -> dict[str, LatentCodebook | TrilinearGridField]:
        def build(name: str) -> LatentCodebook | TrilinearGridField:
            if ablation.feature_space == 'grid':
                return TrilinearGridField(store, name, cfg.grid_resolution,
                                          cfg.F)
            return LatentCodebook(store, name, cfg.B, cfg.F)

        if ablation.shared_codebook:
            shared = build('codebook.shared')
            return {channel: shared for channel in CHANNELS}
        return {channel: build(f'codebook.{channel}') for channel in CHANNELS}

    def query_encoding(self,
                       points: Tensor,
                       times: np.ndarray | None=None) -> Tensor:
        enc = encode(points, self.space_encoder)
        if not self.query_with_time:
            return enc
        column = np.broadcast_to(np.asarray(times, dtype=points.dtype),
                                 points.shape[:1]).reshape(-1, 1)
        return ops.concat([enc, encode(column, self.time_encoder)], axis=-1)

    def density(self,
                points: Tensor,
                times: np.ndarray | None=None) -> Tensor:
        """Density `[P, 1]` at deformed points."""

        query_enc = self.query_encoding(points, times)
        return self.density_head(self.channels['density'](query_enc, points))

    def __call__(self,
                 points: Tensor,
                 view_dirs: np.ndarray,
                 times: np.ndarray | None=None) -> tuple[Tensor, Tensor]:
        """Colour `[P, 3]` and density `[P, 1]` at deformed points."""

        query_enc = self.query_encoding(points, times)
        sigma = self.density_head(self.channels['density'](query_enc,
                                                           points))
        view_enc = encode(np.asarray(view_dirs, dtype=points.dtype),
                          self.view_encoder)
        color = self.color_head(self.channels['color'](query_enc, points),
                                view_enc)
        return color, sigma

    def attention_weights(self,
                          points: Tensor,
                          times: np.ndarray | None=None
                         ) -> dict[str, np.ndarray]:
        """Per-channel attention weights `[P, heads, B]`."""

        query_enc = self.query_encoding(points, times)
        weights = {}
        for channel, module in self.channels.items():
            channel_weights = module.attention_weights(query_enc)
            if channel_weights is not None:
                weights[channel] = channel_weights.data
        return weights


def radiance(points: Tensor,
             view_dirs: np.ndarray,
             field: RadianceField,
             times: np.ndarray | None=None) -> tuple[Tensor, Tensor]:
    return field(points, view_dirs, times)
