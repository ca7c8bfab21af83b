"""Latent time slots: a learnable 1-D table of features over time."""

from __future__ import annotations
import logging

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.parameters import ParameterStore
from src.exceptions import ConfigurationError, InputDomainError


logger = logging.getLogger(__name__)


def check_times(times: np.ndarray | float) -> np.ndarray:
    """Returns `times` as an array, raising for values outside [0, 1]."""

    times = np.asarray(times, dtype=np.float64)
    bad = ~((times >= 0.0) & (times <= 1.0))
    if np.any(bad):
        value = float(times[bad].flat[0])
        raise InputDomainError(f'time {value} is outside of [0, 1]',
                               value=value)
    return times


def slot_coordinates(times: np.ndarray, T: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Slot indices `[..., 2]` and linear weights `[..., 2]` for `times`.

    With u = t*T, i = floor(u) and a = u - i the weights are (1 - a, a)
    on slots (i, i + 1). The last interval is closed so t = 1 maps to
    slot T with weight 1.
    """

    u = check_times(times) * T
    lower = np.minimum(np.floor(u), T - 1).astype(np.intp)
    alpha = u - lower
    index = np.stack([lower, lower + 1], axis=-1)
    weights = np.stack([1.0 - alpha, alpha], axis=-1)
    return index, weights


class TimeSlotTable:
    """Slots h_0..h_T over the normalised time axis [0, 1]."""

    def __init__(self,
                 store: ParameterStore,
                 T: int,
                 F_t: int,
                 name: str='time_slots',
                 std: float=0.1):
        if T < 1:
            raise ConfigurationError(f'T must be at least 1, got {T}',
                                     field='T')
        self.T = T
        self.F_t = F_t
        self.slots = store.create(f'{name}.slots', (T + 1, F_t),
                                  'time_slots', init='normal', std=std)

    def interpolate(self, t: float) -> Tensor:
        return interpolate_slot(t, self)

    def interpolate_many(self, times: np.ndarray) -> Tensor:
        return interpolate_slots(times, self)


def interpolate_slot(t: float, table: TimeSlotTable) -> Tensor:
    """Feature h_t at a single time, shape `[F_t]`."""

    index, weights = slot_coordinates(np.asarray(t), table.T)
    return ops.weighted_gather(table.slots, index, weights)


def interpolate_slots(times: np.ndarray, table: TimeSlotTable) -> Tensor:
    """Features for a batch of times, shape `[P, F_t]`."""

    index, weights = slot_coordinates(np.asarray(times).reshape(-1), table.T)
    return ops.weighted_gather(table.slots, index, weights)


def tv_loss(table: TimeSlotTable, squared: bool=False) -> Tensor:
    """Sum over i of ||h_{i+1} - h_i||, or of its square when `squared`."""

    slots = table.slots
    diff = ops.sub(ops.slice_axis(slots, 1, table.T + 1, axis=0),
                   ops.slice_axis(slots, 0, table.T, axis=0))
    if squared:
        return ops.sum(ops.mul(diff, diff))
    return ops.sum(ops.norm(diff, axis=-1))
