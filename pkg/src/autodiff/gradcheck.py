"""Central finite-difference checks of tape gradients."""

from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor, Tape, precision


logger = logging.getLogger(__name__)


@dataclass
class GradCheckResult:
    name: str
    max_rel_error: float
    tolerance: float
    checked: int
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def __str__(self) -> str:
        status = 'ok' if self.passed else 'FAILED'
        return (f'{self.name}: {status} (max rel. error'
                f' {self.max_rel_error:.3e}, {self.checked} entries)')


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / (abs(numeric) + 1e-8)


def _projection(shape: tuple[int, ...], seed: int) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=shape)


def check_gradients(fn: Callable[..., Tensor],
                    inputs: Sequence[Tensor],
                    name: str='fn',
                    eps: float=1e-5,
                    tolerance: float=1e-6,
                    indices: dict[int, Sequence[tuple[int, ...]]] | None=None,
                    seed: int=0) -> GradCheckResult:
    """Compares tape gradients of `fn(*inputs)` against central differences.

    Non-scalar outputs are reduced to sum(out * R) with a fixed random
    projection R. `indices` restricts the perturbed entries per input
    position; every entry is checked otherwise.
    """

    def loss_value() -> float:
        out = fn(*inputs)
        proj = _projection(out.shape, seed)
        return float(np.sum(out.data * proj))

    for tensor in inputs:
        tensor.zero_grad()
    with Tape() as tape:
        out = fn(*inputs)
        proj = Tensor.wrap(_projection(out.shape, seed).astype(out.dtype))
        loss = ops.sum(ops.mul(out, proj))
    tape.backward(loss)

    result = GradCheckResult(name, 0.0, tolerance, 0)
    for position, tensor in enumerate(inputs):
        if not tensor.requires_grad:
            continue
        analytic = tensor.grad if tensor.grad is not None \
            else np.zeros_like(tensor.data)
        if indices is not None and position in indices:
            entries = [tuple(i) for i in indices[position]]
        else:
            entries = list(np.ndindex(*tensor.shape))

        for entry in entries:
            original = tensor.data[entry].copy()
            tensor.data[entry] = original + eps
            plus = loss_value()
            tensor.data[entry] = original - eps
            minus = loss_value()
            tensor.data[entry] = original

            numeric = (plus - minus) / (2 * eps)
            error = relative_error(float(analytic[entry]), numeric)
            result.checked += 1
            if error > result.max_rel_error:
                result.max_rel_error = error
            if error >= tolerance:
                result.failures.append(
                    f'input {position} entry {entry}: analytic'
                    f' {float(analytic[entry]):.6e}, numeric {numeric:.6e}'
                )

    if not result.passed:
        logger.warning(str(result))
    return result


def _random(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.normal(size=shape), requires_grad=True,
                  dtype=np.float64)


def _away_from_zero(rng: np.random.Generator, *shape: int) -> Tensor:
    values = rng.uniform(0.2, 1.5, size=shape)
    values *= rng.choice([-1.0, 1.0], size=shape)
    return Tensor(values, requires_grad=True, dtype=np.float64)


def op_suite(seed: int=42) -> list[GradCheckResult]:
    """Runs the per-operation gradient checks at 64-bit precision."""

    rng = np.random.default_rng(seed)
    cases: list[tuple[str, Callable[..., Tensor], list[Tensor]]] = [
        ('add', ops.add, [_random(rng, 4, 3), _random(rng, 3)]),
        ('sub', ops.sub, [_random(rng, 4, 3), _random(rng, 4, 3)]),
        ('mul', ops.mul, [_random(rng, 4, 3), _random(rng, 4, 3)]),
        ('neg', ops.neg, [_random(rng, 5)]),
        ('scale', lambda x: ops.scale(x, 2.5), [_random(rng, 5)]),
        ('tanh', ops.tanh, [_random(rng, 6)]),
        ('sin', ops.sin, [_random(rng, 6)]),
        ('cos', ops.cos, [_random(rng, 6)]),
        ('exp', ops.exp, [_random(rng, 6)]),
        ('relu', ops.relu, [_away_from_zero(rng, 6)]),
        ('sigmoid', ops.sigmoid, [_random(rng, 6)]),
        ('softplus', ops.softplus, [_random(rng, 6)]),
        ('gelu', ops.gelu, [_random(rng, 6)]),
        ('concat', lambda a, b: ops.concat([a, b]),
            [_random(rng, 2, 1), _random(rng, 2, 2)]),
        ('sum', lambda x: ops.sum(x, axis=0), [_random(rng, 3, 4)]),
        ('mean', ops.mean, [_random(rng, 3, 4)]),
        ('matmul', ops.matmul, [_random(rng, 2, 4, 3), _random(rng, 3, 2)]),
        ('linear', ops.linear,
            [_random(rng, 4, 3), _random(rng, 3, 2), _random(rng, 2)]),
        ('geglu', ops.geglu,
            [_random(rng, 2, 3), _random(rng, 3, 2), _random(rng, 3, 2),
             _random(rng, 2), _random(rng, 2)]),
        ('softmax', ops.softmax, [_random(rng, 3, 5)]),
        ('reshape', lambda x: ops.reshape(x, (6, 2)), [_random(rng, 3, 4)]),
        ('transpose', lambda x: ops.transpose(x, (1, 0, 2)),
            [_random(rng, 2, 3, 2)]),
        ('slice', lambda x: ops.slice_axis(x, 1, 3), [_random(rng, 2, 4)]),
        ('norm', ops.norm, [_away_from_zero(rng, 3, 4)]),
        ('cumsum', lambda x: ops.cumsum(x, exclusive=True),
            [_random(rng, 2, 5)]),
        ('weighted_gather', lambda table: ops.weighted_gather(
                table,
                np.array([[0, 1], [2, 2], [3, 0]]),
                np.array([[0.25, 0.75], [0.5, 0.5], [1.0, 0.0]])),
            [_random(rng, 4, 3)]),
        ('scatter_rows', lambda x: ops.scatter_rows(x, np.array([3, 0]), 5),
            [_random(rng, 2, 3)]),
        ('mlp', _three_layer_mlp,
            [_random(rng, 5, 4), _random(rng, 4, 6), _random(rng, 6),
             _random(rng, 6, 6), _random(rng, 6), _random(rng, 6, 2),
             _random(rng, 2)])
    ]

    results = []
    with precision(64):
        for name, fn, inputs in cases:
            results.append(check_gradients(fn, inputs, name=name))
    return results


def _three_layer_mlp(x, W1, b1, W2, b2, W3, b3) -> Tensor:
    h = ops.tanh(ops.linear(x, W1, b1))
    h = ops.gelu(ops.linear(h, W2, b2))
    return ops.linear(h, W3, b3)
