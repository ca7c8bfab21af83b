from __future__ import annotations
import logging

import numpy as np

from src.autodiff.tensor import Tensor
from src.autodiff.parameters import ParameterStore, GROUPS
from src.config import ModelConfig, AblationConfig, TrainConfig
from src.deformation import DeformationField
from src.radiance import RadianceField


logger = logging.getLogger(__name__)


class SLS4DModel:
    """Deformation field composed with the latent radiance field.

    Every learnable tensor lives in `store`; the model itself holds no
    state beyond references into it.
    """

    def __init__(self,
                 cfg: ModelConfig,
                 ablation: AblationConfig | None=None,
                 dtype=None,
                 seed: int=0):
        self.cfg = cfg
        self.ablation = ablation or AblationConfig()
        self.store = ParameterStore(dtype=dtype, seed=seed)
        self.deformation = DeformationField(self.store, cfg, self.ablation)
        self.radiance = RadianceField(self.store, cfg, self.ablation)
        logger.info(f'built model with {self.store.count()} parameters'
                    f' ({self.store.count("feature_space")} in the feature'
                    ' space)')

    @classmethod
    def from_config(cls, config: TrainConfig) -> SLS4DModel:
        dtype = np.float64 if config.precision == 64 else np.float32
        return cls(config.model, config.ablation, dtype=dtype,
                   seed=config.seed)

    @property
    def dtype(self) -> np.dtype:
        return self.store.dtype

    def _points(self, points: np.ndarray | Tensor) -> Tensor:
        if isinstance(points, Tensor):
            return points
        return Tensor.wrap(np.asarray(points, dtype=self.dtype)
                           .reshape(-1, 3))

    def canonical(self, points: np.ndarray | Tensor, times: np.ndarray
                 ) -> Tensor:
        """Points moved into the canonical space, x + dx."""

        return self.deformation(self._points(points), times)

    def __call__(self,
                 points: np.ndarray | Tensor,
                 times: np.ndarray,
                 view_dirs: np.ndarray) -> tuple[Tensor, Tensor]:
        """Colour `[P, 3]` and density `[P, 1]` of points at times `[P]`."""

        canonical = self.canonical(points, times)
        return self.radiance(canonical, view_dirs, times)

    def density(self, points: np.ndarray | Tensor, times: np.ndarray
               ) -> Tensor:
        canonical = self.canonical(points, times)
        return self.radiance.density(canonical, times)

    def attention_weights(self,
                          points: np.ndarray | Tensor,
                          times: np.ndarray) -> dict[str, np.ndarray]:
        canonical = self.canonical(points, times)
        return self.radiance.attention_weights(canonical, times)

    def tv_loss(self, squared: bool=False) -> Tensor | None:
        return self.deformation.tv_loss(squared=squared)

    def count_parameters(self) -> dict[str, int]:
        return count_parameters(self)


def count_parameters(model: SLS4DModel | ParameterStore | None
                    ) -> dict[str, int]:
    """Exact parameter counts per group plus `total`."""

    if model is None:
        return {**{group: 0 for group in GROUPS}, 'total': 0}
    store = model.store if isinstance(model, SLS4DModel) else model
    return store.counts()
