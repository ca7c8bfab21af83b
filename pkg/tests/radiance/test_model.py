import dataclasses
import unittest as ut

import numpy as np

from src.autodiff.tensor import Tensor
from src.autodiff.parameters import GROUPS
from src.config import AblationConfig, TrainConfig
from src.model import SLS4DModel, count_parameters
from tests.utils import get_test_methods, tiny_model_config, tiny_model


def wide_codebook_config():
    return dataclasses.replace(tiny_model_config(), B=256, F=64)


class TestModel(ut.TestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.points = rng.uniform(-1.0, 1.0, size=(10, 3))
        self.times = rng.uniform(0.0, 1.0, size=10)
        dirs = rng.normal(size=(10, 3))
        self.dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)

    def test_forward_contract(self):
        model = tiny_model()
        color, sigma = model(self.points, self.times, self.dirs)
        self.assertEqual(color.shape, (10, 3))
        self.assertEqual(sigma.shape, (10, 1))
        self.assertEqual(sigma.dtype, np.float64)
        np.testing.assert_allclose(model.density(self.points,
                                                 self.times).data,
                                   sigma.data)

    def test_seeded_construction(self):
        a = tiny_model(seed=1).store.state_dict()
        b = tiny_model(seed=1).store.state_dict()
        c = tiny_model(seed=2).store.state_dict()
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])
        self.assertTrue(any(not np.array_equal(a[name], c[name])
                            for name in a))

    def test_no_deformation(self):
        model = tiny_model(no_deformation=True)
        canonical = model.canonical(self.points, self.times)
        np.testing.assert_array_equal(canonical.data, self.points)
        self.assertIsNone(model.tv_loss())

    def test_deformation_moves_points(self):
        model = tiny_model(seed=3)
        canonical = model.canonical(self.points, self.times)
        self.assertFalse(np.allclose(canonical.data, self.points))
        self.assertTrue(np.all(np.abs(canonical.data - self.points) < 1.0))

    def test_tv_loss_variants(self):
        model = tiny_model()
        self.assertGreater(model.tv_loss().item(), 0.0)
        self.assertIsNone(tiny_model(no_time_slots=True).tv_loss())

    def test_attention_weights(self):
        weights = tiny_model().attention_weights(self.points, self.times)
        self.assertEqual(weights['density'].shape,
                         (10, tiny_model_config().heads,
                          tiny_model_config().B))

    def test_from_config(self):
        cfg = TrainConfig(model=tiny_model_config(), precision=32)
        self.assertEqual(SLS4DModel.from_config(cfg).dtype, np.float32)
        cfg = cfg.replace(precision=64)
        self.assertEqual(SLS4DModel.from_config(cfg).dtype, np.float64)

    def test_tensor_points(self):
        model = tiny_model()
        a, _ = model(Tensor.wrap(self.points), self.times, self.dirs)
        b, _ = model(self.points, self.times, self.dirs)
        np.testing.assert_array_equal(a.data, b.data)


class TestParameterCounts(ut.TestCase):
    def test_separate_codebooks(self):
        model = SLS4DModel(wide_codebook_config(), dtype=np.float64)
        counts = count_parameters(model)
        self.assertEqual(counts['feature_space'], 32768)
        self.assertEqual(counts['total'], sum(counts[g] for g in GROUPS))

    def test_shared_codebook(self):
        model = SLS4DModel(wide_codebook_config(),
                           AblationConfig(shared_codebook=True),
                           dtype=np.float64)
        self.assertEqual(model.count_parameters()['feature_space'], 16384)

    def test_empty_model(self):
        counts = count_parameters(None)
        self.assertEqual(counts['total'], 0)
        self.assertTrue(all(value == 0 for value in counts.values()))

    def test_ablation_groups(self):
        counts = tiny_model(no_deformation=True).count_parameters()
        self.assertEqual(counts['deformation'], 0)
        self.assertEqual(counts['time_slots'], 0)
        cfg = tiny_model_config()
        counts = tiny_model().count_parameters()
        self.assertEqual(counts['time_slots'], (cfg.T + 1) * cfg.F_t)


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestModel,
        TestParameterCounts
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
