from __future__ import annotations
import logging

import numpy as np

from src.autodiff.parameters import ParameterStore, GROUPS
from src.exceptions import ConfigurationError


logger = logging.getLogger(__name__)


class Adam:
    """Adam with one learning rate per parameter group.

    Moments are kept per parameter name. Parameters whose gradient is
    None at a step are left untouched, moments included.
    """

    def __init__(self,
                 store: ParameterStore,
                 beta1: float=0.9,
                 beta2: float=0.999,
                 eps: float=1e-8):
        self.store = store
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        for param in store:
            self.m[param.name] = np.zeros(param.shape, dtype=store.dtype)
            self.v[param.name] = np.zeros(param.shape, dtype=store.dtype)
        self.last_lrs: dict[str, float] = {}

    def step(self, lrs: dict[str, float]) -> None:
        """Applies one update with `lrs[group]` as each group's rate."""

        missing = {param.group for param in self.store} - set(lrs)
        if missing:
            raise ConfigurationError(
                f'no learning rate for groups {sorted(missing)}'
            )

        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for param in self.store:
            grad = param.tensor.grad
            if grad is None:
                continue
            m = self.m[param.name]
            v = self.v[param.name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            m_hat = m / bias1
            v_hat = v / bias2
            update = lrs[param.group] * m_hat / (np.sqrt(v_hat) + self.eps)
            param.tensor.data = (param.tensor.data - update) \
                .astype(self.store.dtype)
        self.last_lrs = {group: lrs[group] for group in GROUPS if group in lrs}

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {}
        for name in self.m:
            state[f'm.{name}'] = self.m[name].copy()
            state[f'v.{name}'] = self.v[name].copy()
        return state

    def load_state_dict(self, state: dict[str, np.ndarray], t: int) -> None:
        for name in self.m:
            try:
                self.m[name] = np.array(state[f'm.{name}'],
                                        dtype=self.store.dtype)
                self.v[name] = np.array(state[f'v.{name}'],
                                        dtype=self.store.dtype)
            except KeyError as err:
                raise ConfigurationError(
                    f'optimizer state has no moments for {name}', field=name
                ) from err
        self.t = t
