"""Differentiable operations over `Tensor`.

Every function here computes its value with numpy and, when a tape is
active and some input requires a gradient, registers a closure that maps
the output gradient to one gradient per input. Broadcasting is limited
to leading batch dimensions: two shapes are compatible when they are
equal or when the shorter one is a suffix of the longer one.
"""

from __future__ import annotations
import math
from typing import Sequence

import numpy as np
from scipy import special

from src.autodiff.tensor import Tensor, make_result, default_dtype
from src.exceptions import ConfigurationError


Operand = Tensor | float | int | np.ndarray

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def as_tensor(value: Operand, like: Tensor | None=None) -> Tensor:
    """Wraps a constant as a tensor with the dtype of `like`."""

    if isinstance(value, Tensor):
        return value
    if like is not None:
        dtype = like.dtype
    elif isinstance(value, np.ndarray) and value.dtype.kind == 'f':
        dtype = value.dtype
    else:
        dtype = default_dtype()
    return Tensor.wrap(np.asarray(value, dtype=dtype))


def _pair(a: Operand, b: Operand) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, as_tensor(b, a)
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return as_tensor(a, b), b
    return as_tensor(a), as_tensor(b)


def broadcast_shape(op: str,
                    a_shape: tuple[int, ...],
                    b_shape: tuple[int, ...]
                   ) -> tuple[int, ...]:
    if a_shape == b_shape:
        return a_shape
    if len(a_shape) >= len(b_shape):
        long, short = a_shape, b_shape
    else:
        long, short = b_shape, a_shape
    if long[len(long) - len(short):] != short:
        raise ConfigurationError(
            f'{op}: shapes {a_shape} and {b_shape} only broadcast over'
            ' leading dimensions'
        )
    return long


def _binary(op: str, a: Operand, b: Operand) -> tuple[Tensor, Tensor]:
    a, b = _pair(a, b)
    broadcast_shape(op, a.shape, b.shape)
    return a, b


# elementwise arithmetic

def add(a: Operand, b: Operand) -> Tensor:
    a, b = _binary('add', a, b)
    return make_result('add', a.data + b.data, (a, b),
                       lambda g: (g, g))


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _binary('sub', a, b)
    return make_result('sub', a.data - b.data, (a, b),
                       lambda g: (g, -g))


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _binary('mul', a, b)
    a_data, b_data = a.data, b.data
    return make_result('mul', a_data * b_data, (a, b),
                       lambda g: (g * b_data, g * a_data))


def neg(x: Tensor) -> Tensor:
    return make_result('neg', -x.data, (x,), lambda g: (-g,))


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiplies by a constant scalar."""

    factor = float(factor)
    return make_result('scale', x.data * factor, (x,),
                       lambda g: (g * factor,))


# elementwise nonlinearities

def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return make_result('tanh', y, (x,), lambda g: (g * (1.0 - y * y),))


def sin(x: Tensor) -> Tensor:
    x_data = x.data
    return make_result('sin', np.sin(x_data), (x,),
                       lambda g: (g * np.cos(x_data),))


def cos(x: Tensor) -> Tensor:
    x_data = x.data
    return make_result('cos', np.cos(x_data), (x,),
                       lambda g: (-g * np.sin(x_data),))


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    return make_result('exp', y, (x,), lambda g: (g * y,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result('relu', np.where(mask, x.data, 0).astype(x.dtype),
                       (x,), lambda g: (g * mask,))


def sigmoid(x: Tensor) -> Tensor:
    y = special.expit(x.data)
    return make_result('sigmoid', y, (x,),
                       lambda g: (g * y * (1.0 - y),))


def softplus(x: Tensor) -> Tensor:
    x_data = x.data
    y = np.logaddexp(x_data.dtype.type(0), x_data)
    return make_result('softplus', y, (x,),
                       lambda g: (g * special.expit(x_data),))


def gelu(x: Tensor) -> Tensor:
    """GELU with the exact error function, x * Phi(x)."""

    x_data = x.data
    cdf = 0.5 * (1.0 + special.erf(x_data / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x_data * x_data)
    return make_result('gelu', x_data * cdf, (x,),
                       lambda g: (g * (cdf + x_data * pdf),))


# reductions and layout

def sum(x: Tensor, axis: int | None=None, keepdims: bool=False) -> Tensor:
    shape = x.shape

    def backward(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape),)

    data = np.sum(x.data, axis=axis, keepdims=keepdims)
    return make_result('sum', np.asarray(data, dtype=x.dtype), (x,),
                       backward)


def mean(x: Tensor, axis: int | None=None, keepdims: bool=False) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def concat(tensors: Sequence[Operand], axis: int=-1) -> Tensor:
    """Joins tensors along `axis`; backward splits the gradient."""

    tensors = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as err:
        shapes = [t.shape for t in tensors]
        raise ConfigurationError(f'concat: incompatible shapes {shapes}') \
            from err
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return make_result('concat', data, tensors,
                       lambda g: np.split(g, bounds, axis=axis))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    in_shape = x.shape
    try:
        data = x.data.reshape(shape)
    except ValueError as err:
        raise ConfigurationError(f'reshape: cannot view {in_shape} as'
                                 f' {tuple(shape)}') from err
    return make_result('reshape', data, (x,),
                       lambda g: (g.reshape(in_shape),))


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return make_result('transpose', np.transpose(x.data, axes), (x,),
                       lambda g: (np.transpose(g, inverse),))


def slice_axis(x: Tensor, start: int, stop: int, axis: int=-1) -> Tensor:
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)
    shape, dtype = x.shape, x.dtype

    def backward(g: np.ndarray):
        full = np.zeros(shape, dtype=dtype)
        full[index] = g
        return (full,)

    return make_result('slice', x.data[index], (x,), backward)


def norm(x: Tensor, axis: int=-1, keepdims: bool=False) -> Tensor:
    """Euclidean norm; the gradient at the origin is taken as zero."""

    x_data = x.data
    n = np.sqrt(np.sum(x_data * x_data, axis=axis, keepdims=True))

    def backward(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axis)
        safe = np.where(n > 0, n, 1)
        return (np.where(n > 0, g * x_data / safe, 0).astype(x_data.dtype),)

    data = n if keepdims else np.squeeze(n, axis=axis)
    return make_result('norm', data, (x,), backward)


def _reverse_cumsum(g: np.ndarray, axis: int) -> np.ndarray:
    return np.flip(np.cumsum(np.flip(g, axis), axis=axis), axis)


def cumsum(x: Tensor, axis: int=-1, exclusive: bool=False) -> Tensor:
    """Running sum along `axis`; `exclusive` omits the current element."""

    data = np.cumsum(x.data, axis=axis)
    if exclusive:
        data = data - x.data

        def backward(g: np.ndarray):
            return (_reverse_cumsum(g, axis) - g,)
    else:

        def backward(g: np.ndarray):
            return (_reverse_cumsum(g, axis),)

    return make_result('cumsum', data, (x,), backward)


# linear algebra

_BATCH_LETTERS = 'abcdefghij'


def _batched_contract(x: np.ndarray,
                      y: np.ndarray,
                      out_ndim: int,
                      core: str) -> np.ndarray:
    """Matrix contraction `core` that also sums the leading axes of `x`
    and `y` beyond the trailing `out_ndim` axes of the result."""

    lead = _BATCH_LETTERS[:x.ndim - out_ndim]
    batch = _BATCH_LETTERS[len(lead):x.ndim - 2]
    x_core, rest = core.split(',')
    y_core, out_core = rest.split('->')
    spec = (f'{lead}{batch}{x_core},{lead}{batch}{y_core}'
            f'->{batch}{out_core}')
    return np.einsum(spec, x, y, optimize=True)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes with leading-batch broadcast."""

    a, b = _pair(a, b)
    if a.ndim < 2 or b.ndim < 2:
        raise ConfigurationError(
            f'matmul: operands need two axes, got {a.shape} and {b.shape}'
        )
    if a.shape[-1] != b.shape[-2]:
        raise ConfigurationError(
            f'matmul: inner dimensions differ, {a.shape} @ {b.shape}'
        )
    broadcast_shape('matmul', a.shape[:-2], b.shape[:-2])
    a_data, b_data = a.data, b.data

    def backward(g: np.ndarray):
        if a_data.ndim >= b_data.ndim:
            ga = np.matmul(g, np.swapaxes(b_data, -1, -2))
        else:
            ga = _batched_contract(g, b_data, a_data.ndim, 'mn,kn->mk')
        if b_data.ndim == 2:
            gb = a_data.reshape(-1, a_data.shape[-1]).T \
                @ g.reshape(-1, g.shape[-1])
        elif b_data.ndim >= a_data.ndim:
            gb = np.matmul(np.swapaxes(a_data, -1, -2), g)
        else:
            gb = _batched_contract(a_data, g, b_data.ndim, 'mk,mn->kn')
        return ga, gb

    return make_result('matmul', np.matmul(a_data, b_data), (a, b),
                       backward)


def linear(x: Tensor, W: Tensor, b: Tensor | None=None) -> Tensor:
    """Affine map y = xW + b over the trailing axis of `x`."""

    x = as_tensor(x)
    if W.ndim != 2 or x.ndim < 1 or x.shape[-1] != W.shape[0]:
        raise ConfigurationError(
            f'linear: input {x.shape} does not match weight {W.shape}'
        )
    if b is not None and b.shape != (W.shape[1],):
        raise ConfigurationError(
            f'linear: bias {b.shape} does not match weight {W.shape}'
        )
    x_data, W_data = x.data, W.data
    data = x_data @ W_data
    if b is not None:
        data = data + b.data

    def backward(g: np.ndarray):
        gx = g @ W_data.T
        x2 = x_data.reshape(-1, W_data.shape[0])
        g2 = g.reshape(-1, W_data.shape[1])
        return gx, x2.T @ g2, g2.sum(axis=0)

    inputs = (x, W) if b is None else (x, W, b)
    return make_result('linear', data, inputs, backward)


def geglu(x: Tensor,
          W: Tensor,
          V: Tensor,
          b: Tensor,
          c: Tensor) -> Tensor:
    """Gated unit GELU(xW + b) * (xV + c)."""

    if W.shape != V.shape:
        raise ConfigurationError(
            f'geglu: gate {W.shape} and value {V.shape} weights differ'
        )
    return mul(gelu(linear(x, W, b)), linear(x, V, c))


def softmax(x: Tensor, axis: int=-1) -> Tensor:
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / np.sum(e, axis=axis, keepdims=True)

    def backward(g: np.ndarray):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return make_result('softmax', y, (x,), backward)


# indexing

def weighted_gather(table: Tensor,
                    index: np.ndarray,
                    weights: np.ndarray) -> Tensor:
    """Combines rows of a 2-D table with constant weights.

    out[..., :] = sum_k weights[..., k] * table[index[..., k], :]
    """

    if table.ndim != 2:
        raise ConfigurationError(
            f'weighted_gather: table must be 2-D, got {table.shape}'
        )
    index = np.asarray(index, dtype=np.intp)
    weights = np.asarray(weights, dtype=table.dtype)
    if index.shape != weights.shape:
        raise ConfigurationError(
            f'weighted_gather: index {index.shape} and weights'
            f' {weights.shape} differ'
        )
    rows = table.data[index]
    data = np.sum(rows * weights[..., None], axis=-2)
    n_rows, width = table.shape

    def backward(g: np.ndarray):
        contrib = weights[..., None] * g[..., None, :]
        grad = np.zeros((n_rows, width), dtype=g.dtype)
        np.add.at(grad, index.reshape(-1), contrib.reshape(-1, width))
        return (grad,)

    return make_result('weighted_gather', data, (table,), backward)


def scatter_rows(x: Tensor, index: np.ndarray, n: int) -> Tensor:
    """Places row i of `x` at row `index[i]` of a zero tensor of `n` rows."""

    index = np.asarray(index, dtype=np.intp)
    if index.shape != (x.shape[0],):
        raise ConfigurationError(
            f'scatter_rows: {index.shape[0]} indices for {x.shape[0]} rows'
        )
    data = np.zeros((n,) + x.shape[1:], dtype=x.dtype)
    data[index] = x.data
    return make_result('scatter_rows', data, (x,),
                       lambda g: (g[index],))
