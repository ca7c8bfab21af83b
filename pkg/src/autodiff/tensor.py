"""Dense tensors and the define-by-run computation tape."""

from __future__ import annotations
import logging
import threading
import contextlib
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from src.exceptions import ConfigurationError, NonFiniteError


logger = logging.getLogger(__name__)


_PRECISIONS = {32: np.float32, 64: np.float64}
_default_dtype: type[np.floating] = np.float32
_check_finite = True
_local = threading.local()


def default_dtype() -> np.dtype:
    return np.dtype(_default_dtype)


def set_precision(bits: int) -> None:
    """Sets the dtype used for tensors built from Python values."""

    global _default_dtype
    try:
        _default_dtype = _PRECISIONS[bits]
    except KeyError:
        raise ConfigurationError(f'unsupported precision: {bits} bits',
                                 field='precision')


@contextlib.contextmanager
def precision(bits: int) -> Iterator[None]:
    previous = _default_dtype
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(32 if previous is np.float32 else 64)


def set_finite_checks(enabled: bool) -> None:
    global _check_finite
    _check_finite = enabled


class Tensor:
    """A dense array of real values that can take part in a tape."""

    def __init__(self,
                 data: Any,
                 requires_grad: bool=False,
                 dtype: Any=None,
                 name: str | None=None):
        if dtype is None:
            if isinstance(data, (np.ndarray, np.floating)) \
                    and data.dtype.kind == 'f':
                dtype = data.dtype
            else:
                dtype = _default_dtype
        self.data: np.ndarray = np.array(data, dtype=dtype, copy=True)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name
        self._leaf = True

    @classmethod
    def wrap(cls, data: np.ndarray, requires_grad: bool=False) -> Tensor:
        """Builds a tensor around `data` without copying it."""

        tensor = cls.__new__(cls)
        tensor.data = data
        tensor.requires_grad = requires_grad
        tensor.grad = None
        tensor.name = None
        tensor._leaf = True
        return tensor

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._leaf

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        label = f' {self.name}' if self.name else ''
        return (f'<Tensor{label} shape={self.shape} dtype={self.dtype}'
                f' requires_grad={self.requires_grad}>')

    def __add__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.add(self, other)

    def __radd__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.add(other, self)

    def __sub__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.sub(self, other)

    def __rsub__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.sub(other, self)

    def __mul__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.mul(self, other)

    def __rmul__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.mul(other, self)

    def __neg__(self) -> Tensor:
        from src.autodiff import ops
        return ops.neg(self)

    def __matmul__(self, other) -> Tensor:
        from src.autodiff import ops
        return ops.matmul(self, other)


BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class TapeRecord:
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


def _tapes() -> list[Tape]:
    if not hasattr(_local, 'tapes'):
        _local.tapes = []
    return _local.tapes


def current_tape() -> Tape | None:
    tapes = _tapes()
    return tapes[-1] if tapes else None


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sums `grad` over the leading axes that broadcasting added."""

    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra < 0 or grad.shape[extra:] != shape:
        raise ConfigurationError(
            f'cannot reduce gradient of shape {grad.shape} to {shape}'
        )
    return grad.sum(axis=tuple(range(extra)))


class Tape:
    """Ordered record of the operations of one forward pass.

    Rebuilt for every training step. Use as a context manager; while a
    tape is active on the current thread every operation with a
    gradient-requiring input is appended to it.
    """

    def __init__(self):
        self.records: list[TapeRecord] = []

    def __enter__(self) -> Tape:
        _tapes().append(self)
        return self

    def __exit__(self, *args) -> None:
        tapes = _tapes()
        if tapes and tapes[-1] is self:
            tapes.pop()
        elif self in tapes:
            tapes.remove(self)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, record: TapeRecord) -> None:
        self.records.append(record)

    def backward(self, root: Tensor, grad: np.ndarray | None=None) -> None:
        """Deposits d(root)/d(leaf) on every reachable leaf's `grad`."""

        if grad is None:
            if root.size != 1:
                raise ConfigurationError(
                    'backward without an explicit gradient needs a scalar'
                    f' root, got shape {root.shape}'
                )
            grad = np.ones_like(root.data)
        grads: dict[int, np.ndarray] = {id(root): np.asarray(grad)}

        if root.is_leaf and root.requires_grad:
            self._deposit(root, grads.pop(id(root)))

        for record in reversed(self.records):
            out_grad = grads.pop(id(record.output), None)
            if out_grad is None:
                continue

            in_grads = record.backward(out_grad)
            for tensor, in_grad in zip(record.inputs, in_grads):
                if in_grad is None or not tensor.requires_grad:
                    continue
                in_grad = unbroadcast(np.asarray(in_grad), tensor.shape)
                if tensor.is_leaf:
                    self._deposit(tensor, in_grad)
                else:
                    key = id(tensor)
                    if key in grads:
                        grads[key] = grads[key] + in_grad
                    else:
                        grads[key] = in_grad

    @staticmethod
    def _deposit(tensor: Tensor, grad: np.ndarray) -> None:
        grad = grad.astype(tensor.dtype, copy=True)
        if tensor.grad is None:
            tensor.grad = grad
        else:
            tensor.grad = tensor.grad + grad


def make_result(op: str,
                data: np.ndarray,
                inputs: Sequence[Tensor],
                backward: BackwardFn) -> Tensor:
    """Wraps the output of an operation and records it on the tape."""

    data = np.asarray(data)
    if _check_finite and data.dtype.kind == 'f' \
            and not np.isfinite(data).all():
        logger.error(f'non-finite output produced by {op}')
        raise NonFiniteError(op=op)

    tape = current_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor.wrap(data, requires_grad=track)
    if track:
        out._leaf = False
        tape.record(TapeRecord(op, tuple(inputs), out, backward))
    return out
