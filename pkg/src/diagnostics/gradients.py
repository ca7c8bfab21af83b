"""The full gradient suite: every autodiff op, compositing, and the
end-to-end ray loss of a small model at 64-bit precision."""

from __future__ import annotations
import time
import logging

import numpy as np

from src.autodiff.tensor import Tensor, Tape, precision
from src.autodiff.gradcheck import (
    GradCheckResult,
    check_gradients,
    op_suite
)
from src.config import ModelConfig, AblationConfig
from src.model import SLS4DModel
from src.renderer import look_at, Camera, generate_rays, render_rays
from src.renderer.composite import composite_rays
from src.training.loss import total_loss


logger = logging.getLogger(__name__)


END_TO_END_TOLERANCE = 1e-3
END_TO_END_ENTRIES = 10


def tiny_model_config() -> ModelConfig:
    return ModelConfig(B=8, F=8, T=4, F_t=4, L_spatial=2, L_time=2,
                       L_view=1, heads=2, d_h=4, decoder_width=16,
                       decoder_out=16, density_width=8, deform_width=16,
                       deform_depth=3)


def composite_check(seed: int=7) -> GradCheckResult:
    rng = np.random.default_rng(seed)
    sigma = Tensor(rng.uniform(0.1, 2.0, size=(3, 5)), requires_grad=True,
                   dtype=np.float64)
    color = Tensor(rng.uniform(0.0, 1.0, size=(3, 5, 3)),
                   requires_grad=True, dtype=np.float64)
    deltas = rng.uniform(0.05, 0.3, size=(3, 5))
    background = np.array([1.0, 0.5, 0.0])
    with precision(64):
        return check_gradients(
            lambda s, c: composite_rays(s, c, deltas, background),
            [sigma, color], name='composite'
        )


def end_to_end_check(seed: int=0,
                     n_entries: int=END_TO_END_ENTRIES,
                     tolerance: float=END_TO_END_TOLERANCE
                    ) -> GradCheckResult:
    """Checks `n_entries` random parameter entries of the ray loss.

    Entries are drawn among those with a gradient above 1e-7, where a
    relative error is meaningful.
    """

    rng = np.random.default_rng(seed)
    model = SLS4DModel(tiny_model_config(), AblationConfig(),
                       dtype=np.float64, seed=seed)
    camera = Camera.from_fov(0.8, 4, 4, look_at(np.array([0.0, -3.0, 0.5])))
    rays = generate_rays(camera, pixels=np.array([[1, 1], [2, 2], [0, 3]]),
                         time=0.4)
    targets = rng.uniform(0.0, 1.0, size=(len(rays), 3))
    background = np.ones(3)

    def loss(*_params: Tensor) -> Tensor:
        result = render_rays(model, rays, 8, background)
        return total_loss(result.rgb, targets, model.tv_loss(), 1.0,
                          1e-2).total

    params = [param.tensor for param in model.store]
    with precision(64):
        model.store.zero_grad()
        with Tape() as tape:
            value = loss()
        tape.backward(value)

    candidates = [
        (position, entry)
            for position, tensor in enumerate(params)
            if tensor.grad is not None
            for entry in zip(*np.nonzero(np.abs(tensor.grad) > 1e-7))
    ]
    picks = rng.choice(len(candidates), size=min(n_entries, len(candidates)),
                       replace=False)
    indices: dict[int, list[tuple[int, ...]]] = {}
    for pick in picks:
        position, entry = candidates[pick]
        indices.setdefault(position, []).append(tuple(int(i) for i in entry))
    chosen = sorted(indices)

    with precision(64):
        return check_gradients(
            loss, [params[p] for p in chosen], name='end_to_end',
            tolerance=tolerance,
            indices={i: indices[p] for i, p in enumerate(chosen)}
        )


def run_suite(seed: int=42) -> list[GradCheckResult]:
    """All gradient checks; the run passes iff every result passes."""

    started = time.perf_counter()
    results = op_suite(seed)
    results.append(composite_check())
    results.append(end_to_end_check())
    elapsed = time.perf_counter() - started
    failed = [result.name for result in results if not result.passed]
    if failed:
        logger.error(f'gradient checks failed: {failed}')
    else:
        logger.info(f'{len(results)} gradient checks passed in'
                    f' {elapsed:.1f}s')
    return results
