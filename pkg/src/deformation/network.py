from __future__ import annotations
import logging

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.layers import Linear, Sequential
from src.autodiff.parameters import ParameterStore
from src.config import ModelConfig, AblationConfig
from src.encoding import FrequencyEncoderConfig, encode
from src.deformation.timeslots import (
    TimeSlotTable,
    check_times,
    interpolate_slots,
    tv_loss
)


logger = logging.getLogger(__name__)


FINAL_LAYER_GAIN = 0.1


class DeformationNet:
    """Fully connected network mapping enc(x, y, z, t) (+ h_t) to a bounded
    displacement.

    Hidden layers use ReLU, the output layer tanh, so every component of
    the displacement lies in (-1, 1).
    """

    def __init__(self,
                 store: ParameterStore,
                 cfg: ModelConfig,
                 slot_dim: int=0,
                 name: str='deform'):
        self.space_encoder = FrequencyEncoderConfig(cfg.L_spatial,
                                                    cfg.include_input)
        self.time_encoder = FrequencyEncoderConfig(cfg.L_time,
                                                   cfg.include_input)
        self.slot_dim = slot_dim
        self.d_in = self.space_encoder.output_dim(3) \
            + self.time_encoder.output_dim(1) + slot_dim

        width = cfg.deform_width
        layers = [Linear(store, f'{name}.0', self.d_in, width,
                         'deformation', activation='relu')]
        for depth in range(1, cfg.deform_depth - 1):
            layers.append(Linear(store, f'{name}.{depth}', width, width,
                                 'deformation', activation='relu'))
        layers.append(Linear(store, f'{name}.{cfg.deform_depth - 1}', width,
                             3, 'deformation', activation='tanh',
                             gain=FINAL_LAYER_GAIN))
        self.mlp = Sequential(layers)

    def __call__(self,
                 points: Tensor,
                 times: np.ndarray,
                 slot_features: Tensor | None=None) -> Tensor:
        column = np.asarray(times, dtype=points.dtype).reshape(-1, 1)
        parts = [
            encode(points, self.space_encoder),
            encode(column, self.time_encoder)
        ]
        if self.slot_dim:
            parts.append(slot_features)
        return self.mlp(ops.concat(parts, axis=-1))


def deform(points: Tensor | np.ndarray,
           times: np.ndarray,
           net: DeformationNet,
           table: TimeSlotTable | None=None) -> Tensor:
    """Displacements `[P, 3]` for points `[P, 3]` at per-point times `[P]`."""

    points = ops.as_tensor(points)
    times = check_times(np.broadcast_to(times, points.shape[:1]))
    slot_features = interpolate_slots(times, table) \
        if table is not None else None
    return net(points, times, slot_features)


class DeformationField:
    """Deformation network plus its time-slot table, honouring ablations.

    `no_deformation` removes both, so points pass through unchanged;
    `no_time_slots` keeps a plain network on enc(x, y, z, t).
    """

    def __init__(self,
                 store: ParameterStore,
                 cfg: ModelConfig,
                 ablation: AblationConfig):
        self.enabled = not ablation.no_deformation
        self.table: TimeSlotTable | None = None
        self.net: DeformationNet | None = None
        if not self.enabled:
            return

        if not ablation.no_time_slots:
            self.table = TimeSlotTable(store, cfg.T, cfg.F_t)
        slot_dim = cfg.F_t if self.table is not None else 0
        self.net = DeformationNet(store, cfg, slot_dim=slot_dim)

    def displacement(self, points: Tensor, times: np.ndarray
                    ) -> Tensor | None:
        if not self.enabled:
            check_times(times)
            return None
        return deform(points, times, self.net, self.table)

    def __call__(self, points: Tensor, times: np.ndarray) -> Tensor:
        """Deformed points x + dx."""

        delta = self.displacement(points, times)
        if delta is None:
            return points
        return ops.add(points, delta)

    def tv_loss(self, squared: bool=False) -> Tensor | None:
        if self.table is None:
            return None
        return tv_loss(self.table, squared=squared)
