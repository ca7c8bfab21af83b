import unittest as ut

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor, Tape
from src.training import color_loss, total_loss
from tests.utils import get_test_methods


def rgb(values) -> Tensor:
    return Tensor(values, requires_grad=True, dtype=np.float64)


class TestLoss(ut.TestCase):
    def test_color_loss(self):
        pred = rgb([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        targets = np.array([[0.0, 0.0, 0.0], [0.0, 0.6, 0.8]])
        self.assertAlmostEqual(color_loss(pred, targets).item(), 1.0)

    def test_exact_targets(self):
        pred = rgb([[0.2, 0.4, 0.6]])
        with Tape() as tape:
            terms = total_loss(pred, pred.data.copy(), None, 1.0, 0.0)
        tape.backward(terms.total)
        self.assertEqual(terms.value, 0.0)
        np.testing.assert_array_equal(pred.grad, np.zeros((1, 3)))

    def test_decomposition(self):
        pred = rgb([[0.3, 0.1, 0.9], [0.5, 0.5, 0.5]])
        targets = np.array([[0.0, 0.2, 1.0], [1.0, 0.0, 0.5]])
        tv = Tensor(2.5, dtype=np.float64)
        terms = total_loss(pred, targets, tv, 3.0, 0.1)
        color = color_loss(pred, targets).item()
        self.assertAlmostEqual(terms.color, color)
        self.assertAlmostEqual(terms.tv, 2.5)
        self.assertAlmostEqual(terms.value, 3.0 * color + 0.1 * 2.5)

    def test_tv_only(self):
        pred = rgb([[0.3, 0.1, 0.9]])
        slots = Tensor(np.array([[0.0], [3.0], [3.0]]), requires_grad=True,
                       dtype=np.float64)
        with Tape() as tape:
            tv = ops.sum(ops.norm(ops.sub(ops.slice_axis(slots, 1, 3, 0),
                                          ops.slice_axis(slots, 0, 2, 0))))
            terms = total_loss(pred, np.zeros((1, 3)), tv, 0.0, 1.0)
        tape.backward(terms.total)
        self.assertAlmostEqual(terms.value, 3.0)
        np.testing.assert_array_equal(pred.grad, np.zeros((1, 3)))

    def test_dropped_tv(self):
        pred = rgb([[0.5, 0.5, 0.5]])
        targets = np.zeros((1, 3))
        terms = total_loss(pred, targets, None, 1.0, 1.0)
        self.assertAlmostEqual(terms.value, 0.75)
        self.assertEqual(terms.tv, 0.0)
        terms = total_loss(pred, targets, Tensor(4.0, dtype=np.float64), 1.0,
                           0.0)
        self.assertAlmostEqual(terms.value, 0.75)
        self.assertAlmostEqual(terms.tv, 4.0)


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestLoss
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
