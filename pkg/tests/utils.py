import unittest as ut
from typing import Type, Any

import numpy as np

from src.autodiff.tensor import Tensor
from src.config import (
    TrainConfig,
    AblationConfig,
    RenderConfig,
    OccupancyConfig
)
from src.diagnostics.gradients import tiny_model_config
from src.model import SLS4DModel


def get_test_methods(test_case: Type[ut.TestCase]) -> list[ut.TestCase]:
    return [
        test_case(func)
            for func
            in dir(test_case)
            if (
                callable(getattr(test_case, func))
                    and func.startswith('test_')
            )
    ]


def tiny_train_config(output_dir: str, **changes: Any) -> TrainConfig:
    """A 64-bit configuration small enough to train for a few steps."""

    cfg = TrainConfig(
        seed=3,
        precision=64,
        output_dir=output_dir,
        N_w=2,
        N_m=20,
        ray_batch_size=32,
        log_every=1,
        validate_every=1000,
        checkpoint_every=4,
        model=tiny_model_config(),
        render=RenderConfig(n_samples=8, n_samples_eval=8, chunk_size=16,
                            block_size=64),
        occupancy=OccupancyConfig(enabled=True, resolution=4,
                                  threshold=0.01, cadence=3, n_times=2)
    )
    return cfg.replace(**changes) if changes else cfg


def tiny_model(seed: int=0, **ablation: Any) -> SLS4DModel:
    return SLS4DModel(tiny_model_config(), AblationConfig(**ablation),
                      dtype=np.float64, seed=seed)


class SlabField:
    """Constant density and colour for x in [x0, x1], empty elsewhere."""

    def __init__(self,
                 sigma: float,
                 color: tuple[float, float, float],
                 x0: float=-1.0,
                 x1: float=1.0):
        self.sigma = sigma
        self.color = np.asarray(color, dtype=np.float64)
        self.x0 = x0
        self.x1 = x1
        self.dtype = np.dtype(np.float64)
        self.calls = 0
        self.rows = 0

    def density(self, points: np.ndarray, times: np.ndarray) -> Tensor:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        inside = (points[:, 0] >= self.x0) & (points[:, 0] <= self.x1)
        return Tensor.wrap(np.where(inside, self.sigma, 0.0).reshape(-1, 1))

    def __call__(self,
                 points: np.ndarray,
                 times: np.ndarray,
                 dirs: np.ndarray) -> tuple[Tensor, Tensor]:
        sigma = self.density(points, times)
        self.calls += 1
        self.rows += sigma.shape[0]
        color = np.broadcast_to(self.color, (sigma.shape[0], 3)).copy()
        return Tensor.wrap(color), sigma
