import unittest as ut

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import (
    Tensor,
    Tape,
    precision,
    default_dtype,
    set_precision,
    set_finite_checks,
    unbroadcast
)
from src.exceptions import ConfigurationError, NonFiniteError
from tests.utils import get_test_methods


class TestPrecision(ut.TestCase):
    def test_default_is_single(self):
        self.assertEqual(default_dtype(), np.float32)
        self.assertEqual(Tensor([1.0, 2.0]).dtype, np.float32)

    def test_context_restores(self):
        with precision(64):
            self.assertEqual(default_dtype(), np.float64)
            self.assertEqual(Tensor(1.5).dtype, np.float64)
        self.assertEqual(default_dtype(), np.float32)

    def test_float_arrays_keep_dtype(self):
        x = Tensor(np.ones(3, dtype=np.float64))
        self.assertEqual(x.dtype, np.float64)

    def test_unsupported_precision(self):
        with self.assertRaises(ConfigurationError):
            set_precision(16)


class TestTape(ut.TestCase):
    def test_square_gradient(self):
        x = Tensor([1.0, -2.0, 3.0], requires_grad=True, dtype=np.float64)
        with Tape() as tape:
            y = ops.sum(ops.mul(x, x))
        tape.backward(y)
        np.testing.assert_allclose(x.grad, [2.0, -4.0, 6.0])

    def test_shared_input_accumulates(self):
        x = Tensor([0.5, 1.5], requires_grad=True, dtype=np.float64)
        with Tape() as tape:
            y = ops.sum(ops.add(ops.scale(x, 3.0), x))
        tape.backward(y)
        np.testing.assert_allclose(x.grad, [4.0, 4.0])

    def test_leaf_grads_accumulate_across_passes(self):
        x = Tensor([1.0], requires_grad=True, dtype=np.float64)
        for _ in range(2):
            with Tape() as tape:
                y = ops.sum(ops.scale(x, 2.0))
            tape.backward(y)
        np.testing.assert_allclose(x.grad, [4.0])
        x.zero_grad()
        self.assertIsNone(x.grad)

    def test_no_tape_no_tracking(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        y = ops.mul(x, x)
        self.assertFalse(y.requires_grad)
        self.assertTrue(y.is_leaf)

    def test_constants_are_not_recorded(self):
        with Tape() as tape:
            ops.add(Tensor([1.0]), Tensor([2.0]))
        self.assertEqual(len(tape), 0)

    def test_non_scalar_root_needs_gradient(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            y = ops.scale(x, 2.0)
        with self.assertRaises(ConfigurationError):
            tape.backward(y)
        tape.backward(y, np.ones(2, dtype=np.float32))
        np.testing.assert_allclose(x.grad, [2.0, 2.0])

    def test_broadcast_gradient_is_reduced(self):
        bias = Tensor([1.0, 2.0, 3.0], requires_grad=True, dtype=np.float64)
        x = Tensor(np.ones((4, 3)), dtype=np.float64)
        with Tape() as tape:
            y = ops.sum(ops.add(x, bias))
        tape.backward(y)
        np.testing.assert_allclose(bias.grad, [4.0, 4.0, 4.0])

    def test_unbroadcast(self):
        grad = np.ones((2, 5, 3))
        self.assertEqual(unbroadcast(grad, (3,)).shape, (3,))
        np.testing.assert_allclose(unbroadcast(grad, (5, 3)), 2.0)
        with self.assertRaises(ConfigurationError):
            unbroadcast(grad, (4,))


class TestFiniteChecks(ut.TestCase):
    def test_overflow_raises(self):
        x = Tensor([1000.0], dtype=np.float64)
        with np.errstate(over='ignore'):
            with self.assertRaises(NonFiniteError) as ctx:
                ops.exp(x)
        self.assertEqual(ctx.exception.op, 'exp')

    def test_checks_can_be_disabled(self):
        x = Tensor([1000.0], dtype=np.float64)
        set_finite_checks(False)
        try:
            with np.errstate(over='ignore'):
                y = ops.exp(x)
        finally:
            set_finite_checks(True)
        self.assertTrue(np.isinf(y.data[0]))


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestPrecision,
        TestTape,
        TestFiniteChecks
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
