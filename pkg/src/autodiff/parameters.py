from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from src.autodiff.tensor import Tensor, default_dtype
from src.exceptions import ConfigurationError


logger = logging.getLogger(__name__)


GROUPS = (
    'feature_space',
    'attention',
    'mlp_early',
    'mlp_late',
    'deformation',
    'time_slots'
)


Init = Literal['uniform', 'zeros', 'normal']


@dataclass
class Parameter:
    name: str
    group: str
    tensor: Tensor

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tensor.shape


class ParameterStore:
    """Named, shaped, learnable tensors tagged with an optimiser group.

    Names are unique and shapes are fixed once created. Initialisation
    draws from a generator seeded at construction, so two stores built
    with the same seed and the same creation order hold identical values.
    """

    def __init__(self, dtype=None, seed: int=0):
        self.dtype = np.dtype(dtype or default_dtype())
        self.rng = np.random.default_rng(seed)
        self._params: dict[str, Parameter] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._params[name].tensor
        except KeyError:
            raise ConfigurationError(f'no parameter named {name}',
                                     field=name)

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params.keys())

    def group_of(self, name: str) -> str:
        return self._params[name].group

    def create(self,
               name: str,
               shape: tuple[int, ...],
               group: str,
               init: Init='uniform',
               fan_in: int | None=None,
               std: float=0.1,
               gain: float=1.0) -> Tensor:
        """Registers a new parameter and returns its tensor.

        `uniform` draws from U(-gain/sqrt(fan_in), gain/sqrt(fan_in)),
        `normal` from N(0, std^2) and `zeros` fills with 0.
        """

        if name in self._params:
            raise ConfigurationError(f'parameter {name} already exists',
                                     field=name)
        if group not in GROUPS:
            raise ConfigurationError(f'unknown parameter group {group}',
                                     field=name)
        shape = tuple(int(extent) for extent in shape)
        if any(extent <= 0 for extent in shape):
            raise ConfigurationError(f'parameter {name} has a non-positive'
                                     f' extent: {shape}', field=name)

        match init:
            case 'uniform':
                fan_in = fan_in or shape[0]
                bound = gain / np.sqrt(fan_in)
                data = self.rng.uniform(-bound, bound, size=shape)
            case 'normal':
                data = self.rng.normal(0.0, std, size=shape)
            case 'zeros':
                data = np.zeros(shape)
            case other:
                raise ConfigurationError(f'unknown initialiser {other}',
                                         field=name)

        tensor = Tensor(data, requires_grad=True, dtype=self.dtype,
                        name=name)
        self._params[name] = Parameter(name, group, tensor)
        return tensor

    def linear(self,
               prefix: str,
               d_in: int,
               d_out: int,
               group: str,
               gain: float=1.0,
               zero: bool=False) -> tuple[Tensor, Tensor]:
        """Creates a weight `[d_in, d_out]` and a zero bias `[d_out]`."""

        init = 'zeros' if zero else 'uniform'
        weight = self.create(f'{prefix}.weight', (d_in, d_out), group,
                             init=init, fan_in=d_in, gain=gain)
        bias = self.create(f'{prefix}.bias', (d_out,), group, init='zeros')
        return weight, bias

    def count(self, group: str | None=None) -> int:
        return int(sum(
            param.tensor.size
                for param
                in self._params.values()
                if group is None or param.group == group
        ))

    def counts(self) -> dict[str, int]:
        counts = {group: self.count(group) for group in GROUPS}
        counts['total'] = self.count()
        return counts

    def zero_grad(self) -> None:
        for param in self._params.values():
            param.tensor.zero_grad()

    def assign(self, name: str, value: np.ndarray) -> None:
        tensor = self[name]
        value = np.asarray(value)
        if value.shape != tensor.shape:
            raise ConfigurationError(
                f'cannot assign shape {value.shape} to parameter {name}'
                f' of shape {tensor.shape}', field=name
            )
        tensor.data = value.astype(tensor.dtype, copy=True)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {
            name: param.tensor.data.copy()
                for name, param
                in self._params.items()
        }

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(state)
        unexpected = set(state) - set(self._params)
        if missing or unexpected:
            raise ConfigurationError(
                f'parameter mismatch, missing {sorted(missing)},'
                f' unexpected {sorted(unexpected)}'
            )
        for name, value in state.items():
            self.assign(name, value)
        logger.info(f'loaded {len(state)} parameters')
