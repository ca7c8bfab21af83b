from __future__ import annotations
from dataclasses import dataclass

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor


@dataclass
class LossTerms:
    total: Tensor
    color: float
    tv: float

    @property
    def value(self) -> float:
        return self.total.item()


def color_loss(rgb: Tensor, targets: np.ndarray) -> Tensor:
    """Mean over rays of the squared colour error ||C - C_hat||^2."""

    diff = ops.sub(rgb, np.asarray(targets, dtype=rgb.dtype))
    return ops.mean(ops.sum(ops.mul(diff, diff), axis=-1))


def total_loss(rgb: Tensor,
               targets: np.ndarray,
               tv: Tensor | None,
               w_c: float,
               w_t: float) -> LossTerms:
    """w_c * L_color + w_t * L_t; the TV term is dropped when `tv` is None
    or `w_t` is 0."""

    color = color_loss(rgb, targets)
    total = ops.scale(color, w_c)
    tv_value = 0.0
    if tv is not None:
        tv_value = tv.item()
        if w_t != 0.0:
            total = ops.add(total, ops.scale(tv, w_t))
    return LossTerms(total, color.item(), tv_value)
