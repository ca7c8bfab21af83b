import unittest as ut

import numpy as np

from src.exceptions import ConfigurationError
from src.renderer import (
    Ray,
    RayBatch,
    OccupancyGrid,
    sample_distances,
    sample_deltas,
    sample_points,
    sample_along,
    keep_mask
)
from tests.utils import get_test_methods


def slab_ray() -> Ray:
    return Ray(np.array([-3.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), 2.0,
               4.0, 0.5)


class TestSampleDistances(ut.TestCase):
    def test_bin_centres(self):
        taus = sample_distances(np.array([0.0]), np.array([3.0]), 3)
        np.testing.assert_allclose(taus, [[0.5, 1.5, 2.5]])

    def test_stratified_within_bins(self):
        rng = np.random.default_rng(0)
        near = np.array([0.0, 1.0])
        far = np.array([4.0, 2.0])
        taus = sample_distances(near, far, 16, stratified=True, rng=rng)
        width = (far - near)[:, None] / 16
        lower = near[:, None] + np.arange(16) * width
        self.assertTrue(np.all(taus >= lower))
        self.assertTrue(np.all(taus <= lower + width))
        self.assertTrue(np.all(np.diff(taus, axis=-1) > 0))

    def test_seeded_stratification(self):
        a = sample_distances(np.zeros(1), np.ones(1), 8, True,
                             np.random.default_rng(5))
        b = sample_distances(np.zeros(1), np.ones(1), 8, True,
                             np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_needs_a_sample(self):
        with self.assertRaises(ConfigurationError):
            sample_distances(np.zeros(1), np.ones(1), 0)


class TestSampleGeometry(ut.TestCase):
    def test_deltas(self):
        taus = np.array([[0.5, 1.5, 2.5]])
        np.testing.assert_allclose(sample_deltas(taus, np.array([3.0])),
                                   [[1.0, 1.0, 0.5]])

    def test_points(self):
        rays = RayBatch.from_rays([slab_ray()])
        points = sample_points(rays, np.array([[2.0, 3.0]]))
        np.testing.assert_allclose(points, [[[-1.0, 0.0, 0.0],
                                             [0.0, 0.0, 0.0]]])

    def test_keep_mask_without_grid(self):
        points = np.array([[0.0, 0.0, 0.0], [1.5, 0.0, 0.0],
                           [1.0, -1.0, 1.0]])
        np.testing.assert_array_equal(keep_mask(points), [True, False, True])


class TestSampleAlong(ut.TestCase):
    def test_deterministic(self):
        taus = sample_along(slab_ray(), 4)
        np.testing.assert_allclose(taus, [2.25, 2.75, 3.25, 3.75])

    def test_empty_middle_third(self):
        occ = OccupancyGrid(resolution=6)
        occ.set_region(np.array([-1 / 3, -1.0, -1.0]),
                       np.array([1 / 3, 1.0, 1.0]), occupied=False)
        taus = sample_along(slab_ray(), 60, occ=occ)
        x = -3.0 + taus
        self.assertGreater(len(taus), 0)
        self.assertFalse(np.any((x > -1 / 3) & (x < 1 / 3)))
        self.assertTrue(np.all(np.diff(taus) > 0))

    def test_stratified(self):
        rng = np.random.default_rng(3)
        taus = sample_along(slab_ray(), 10, stratified=True, rng=rng)
        self.assertEqual(len(taus), 10)
        self.assertTrue(np.all((taus >= 2.0) & (taus <= 4.0)))


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestSampleDistances,
        TestSampleGeometry,
        TestSampleAlong
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
