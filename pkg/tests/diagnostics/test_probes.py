import os
import tempfile
import unittest as ut

import numpy as np

from src.diagnostics import (
    probe_ray,
    probe_points,
    read_probe_csv,
    attention_columns,
    row_normalized
)
from src.renderer import Ray, read_png
from tests.utils import get_test_methods, tiny_model


def target_ray() -> Ray:
    return Ray(np.array([0.0, -3.0, 0.2]), np.array([0.0, 1.0, 0.0]), 2.0,
               4.0, 0.3)


class TestRayProbe(ut.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.model = tiny_model(seed=2)

    def tearDown(self):
        self.tmp.cleanup()

    def test_report(self):
        report = probe_ray(self.model, target_ray(), N=9)
        self.assertEqual(report.taus.shape, (9,))
        self.assertTrue(np.all(np.diff(report.taus) > 0))
        self.assertGreaterEqual(report.taus[0], 2.0)
        self.assertLessEqual(report.taus[-1], 4.0)
        np.testing.assert_allclose(report.points[:, 1],
                                   -3.0 + report.taus)
        self.assertTrue(np.all(report.sigma >= 0.0))
        self.assertTrue(np.all(report.weights >= 0.0))
        self.assertLessEqual(report.weights.sum(), 1.0 + 1e-12)

        for channel in ('density', 'color'):
            weights = report.attention[channel]
            self.assertEqual(weights.shape, (9, 2, 8))
            np.testing.assert_allclose(weights.sum(axis=-1), 1.0)

    def test_csv_round_trip(self):
        report = probe_ray(self.model, target_ray(), N=5, ray_id='centre')
        path = report.to_csv(os.path.join(self.tmp.name, 'probe.csv'))
        frame = read_probe_csv(path)

        expected = ['tau', 'x', 'y', 'z', 'sigma', 'weight'] \
            + attention_columns(report.attention)
        self.assertEqual(list(frame.columns), expected)
        self.assertEqual(len(expected), 6 + 2 * 2 * 8)
        self.assertEqual(expected[6], 'density_h0_c0')
        self.assertEqual(expected[-1], 'color_h1_c7')
        np.testing.assert_array_equal(frame['tau'].to_numpy(), report.taus)
        np.testing.assert_array_equal(frame['sigma'].to_numpy(),
                                      report.sigma)
        np.testing.assert_array_equal(
            frame['density_h1_c3'].to_numpy(),
            report.attention['density'][:, 1, 3]
        )

    def test_weight_png(self):
        report = probe_ray(self.model, target_ray(), N=7)
        path = report.write_weight_png(os.path.join(self.tmp.name, 'w.png'))
        image = read_png(path)
        self.assertEqual(image.shape, (7, 16, 4))
        self.assertTrue(np.all(image[..., :3].max(axis=1) == 255))

    def test_grid_has_no_attention(self):
        model = tiny_model(feature_space='grid')
        report = probe_ray(model, target_ray(), N=4)
        self.assertEqual(report.attention, {})
        self.assertEqual(list(report.to_frame().columns),
                         ['tau', 'x', 'y', 'z', 'sigma', 'weight'])


class TestRowNormalized(ut.TestCase):
    def test_rows(self):
        matrix = np.array([[0.1, 0.4, 0.2], [0.0, 0.0, 0.0]])
        np.testing.assert_allclose(row_normalized(matrix),
                                   [[0.25, 1.0, 0.5], [0.0, 0.0, 0.0]])


class TestPointProbe(ut.TestCase):
    def setUp(self):
        rng = np.random.default_rng(3)
        self.points = rng.uniform(-0.8, 0.8, size=(6, 3))
        self.report = probe_points(tiny_model(seed=4), self.points, 0.5)

    def test_vectors(self):
        vectors = self.report.vectors('density')
        self.assertEqual(vectors.shape, (6, 8))
        np.testing.assert_allclose(vectors.sum(axis=-1), 1.0)

    def test_effective_support(self):
        support = self.report.effective_support('color')
        self.assertTrue(np.all((support >= 1) & (support <= 8)))
        np.testing.assert_array_equal(
            self.report.effective_support('color', mass=1.0 - 1e-9) >= support,
            True
        )

    def test_cosine_similarity(self):
        self.assertAlmostEqual(self.report.cosine_similarity(2, 2), 1.0)
        value = self.report.cosine_similarity(0, 1)
        self.assertGreater(value, 0.0)
        self.assertLessEqual(value, 1.0 + 1e-12)

    def test_frame(self):
        frame = self.report.to_frame()
        self.assertEqual(len(frame), 6)
        self.assertIn('density_support', frame)
        self.assertIn('color_support', frame)
        np.testing.assert_array_equal(frame[['x', 'y', 'z']].to_numpy(),
                                      self.points)


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestRayProbe,
        TestRowNormalized,
        TestPointProbe
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
