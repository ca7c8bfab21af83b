"""Learning-rate factor: linear warmup, then exponential and cyclic
cosine decay.

    s <= N_w:  s / N_w
    s >  N_w:  exp(-u) * 0.5 * (1 + cos(pi * u)),  u = (s - N_w) / N_m

The `literal` variant evaluates exp(+u) * (1 + cos(pi * u)) after the
warmup, which jumps to 2 at N_w and grows with s; it exists only for
comparison runs.
"""

from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Literal

from src.exceptions import InputDomainError


Decay = Literal['cos', 'exp', 'cos_exp']


@dataclass
class ScheduleState:
    step: int = 0

    def advance(self) -> int:
        self.step += 1
        return self.step


def lr_factor(s: int,
              N_w: int,
              N_m: int,
              decay: Decay='cos_exp',
              literal: bool=False) -> float:
    if s < 0:
        raise InputDomainError(f'training step must be nonnegative, got {s}',
                               value=s)
    if s <= N_w:
        return s / N_w

    u = (s - N_w) / N_m
    if literal:
        exp_part = math.exp(u)
        cos_part = 1.0 + math.cos(math.pi * u)
    else:
        exp_part = math.exp(-u)
        cos_part = 0.5 * (1.0 + math.cos(math.pi * u))

    match decay:
        case 'cos':
            return cos_part
        case 'exp':
            return exp_part
        case _:
            return exp_part * cos_part


def lr_factor_for(s: int, cfg) -> float:
    """`lr_factor` with the constants of a `TrainConfig`."""

    return lr_factor(s, cfg.N_w, cfg.N_m, decay=cfg.ablation.decay,
                     literal=cfg.literal_schedule)
