import math
import unittest as ut

from src.config import TrainConfig, AblationConfig
from src.exceptions import InputDomainError
from src.training import ScheduleState, lr_factor, lr_factor_for
from tests.utils import get_test_methods


N_W = 2000
N_M = 30000


class TestLRFactor(ut.TestCase):
    def test_start(self):
        self.assertEqual(lr_factor(0, N_W, N_M), 0.0)

    def test_warmup(self):
        self.assertAlmostEqual(lr_factor(500, N_W, N_M), 0.25)
        self.assertEqual(lr_factor(N_W, N_W, N_M), 1.0)

    def test_continuity_after_warmup(self):
        self.assertAlmostEqual(lr_factor(N_W + 1, N_W, N_M), 1.0, places=4)

    def test_half_way(self):
        s = N_W + N_M // 2
        self.assertAlmostEqual(lr_factor(s, N_W, N_M), math.exp(-0.5) / 2)
        self.assertAlmostEqual(lr_factor(s, N_W, N_M), 0.3033, places=4)

    def test_decay_variants(self):
        s = N_W + N_M // 2
        self.assertAlmostEqual(lr_factor(s, N_W, N_M, decay='cos'), 0.5)
        self.assertAlmostEqual(lr_factor(s, N_W, N_M, decay='exp'),
                               math.exp(-0.5))

    def test_literal_variant(self):
        self.assertAlmostEqual(lr_factor(N_W + 1, N_W, N_M, literal=True),
                               2.0, places=3)
        self.assertEqual(lr_factor(N_W, N_W, N_M, literal=True), 1.0)

    def test_no_jumps(self):
        previous = lr_factor(0, N_W, N_M)
        for s in range(1, N_M + 1):
            current = lr_factor(s, N_W, N_M)
            self.assertLess(abs(current - previous), 2.0 / N_W)
            self.assertGreaterEqual(current, 0.0)
            previous = current

    def test_negative_step(self):
        with self.assertRaises(InputDomainError):
            lr_factor(-1, N_W, N_M)

    def test_from_config(self):
        cfg = TrainConfig(N_w=10, N_m=100,
                          ablation=AblationConfig(decay='exp'))
        self.assertAlmostEqual(lr_factor_for(60, cfg), math.exp(-0.5))
        cfg = cfg.replace(literal_schedule=True)
        self.assertAlmostEqual(lr_factor_for(60, cfg), math.exp(0.5))


class TestScheduleState(ut.TestCase):
    def test_advance(self):
        state = ScheduleState()
        self.assertEqual(state.advance(), 1)
        self.assertEqual(state.advance(), 2)
        self.assertEqual(state.step, 2)


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestLRFactor,
        TestScheduleState
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
