import os
import json
import math
import tempfile
import unittest as ut

import numpy as np

from src.data import (
    DynamicDataset,
    Frame,
    load_dnerf,
    write_dnerf,
    composite_rgba,
    estimate_normalization,
    get_preset,
    make_synthetic_dataset
)
from src.data.dataset import box_downscale
from src.exceptions import DataError, ConfigurationError
from src.renderer import look_at, write_png
from src.renderer.images import to_uint8
from tests.utils import get_test_methods


def _pose(eye, target=(0.0, 0.0, 0.0)) -> list[list[float]]:
    return look_at(np.asarray(eye), np.asarray(target)).tolist()


class TestImages(ut.TestCase):
    def test_composite_over_white(self):
        rgba = np.array([[[255, 0, 0, 128]]], dtype=np.uint8)
        rgb = composite_rgba(rgba, np.ones(3))
        np.testing.assert_array_equal(to_uint8(rgb)[0, 0], [255, 127, 127])

    def test_composite_over_black(self):
        rgba = np.array([[[200, 100, 50, 0], [200, 100, 50, 255]]],
                        dtype=np.uint8)
        rgb = composite_rgba(rgba, np.zeros(3))
        np.testing.assert_array_equal(rgb[0, 0], np.zeros(3))
        np.testing.assert_allclose(rgb[0, 1],
                                   np.array([200, 100, 50]) / 255.0)

    def test_box_downscale(self):
        image = np.arange(4 * 6 * 3, dtype=np.float64).reshape(4, 6, 3)
        small = box_downscale(image, 2)
        self.assertEqual(small.shape, (2, 3, 3))
        np.testing.assert_allclose(small[0, 0],
                                   image[:2, :2].mean(axis=(0, 1)))
        self.assertIs(box_downscale(image, 1), image)


class TestNormalization(ut.TestCase):
    def test_centre_and_scale(self):
        target = np.array([0.5, -0.25, 0.0])
        eyes = [
            target + 4.0 * np.array([np.cos(a), np.sin(a), 0.3])
                / np.linalg.norm([np.cos(a), np.sin(a), 0.3])
                for a
                in np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
        ]
        poses = np.stack([np.array(_pose(eye, target)) for eye in eyes])
        norm = estimate_normalization(poses, 0.7)
        np.testing.assert_allclose(norm.center, target, atol=1e-6)
        self.assertAlmostEqual(norm.scale,
                               1.0 / (1.1 * 4.0 * math.tan(0.35)),
                               places=5)

        moved = norm.apply(poses[0])
        np.testing.assert_allclose(moved[:3, :3], poses[0][:3, :3])
        np.testing.assert_allclose(moved[:3, 3],
                                   (poses[0][:3, 3] - target) * norm.scale,
                                   atol=1e-6)


class TestDnerfFormat(ut.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def _write_transforms(self, frames, split='train', **extra):
        transforms = {'camera_angle_x': 0.7, 'frames': frames, **extra}
        with open(os.path.join(self.dir, f'transforms_{split}.json'),
                  'w') as fp:
            json.dump(transforms, fp)

    def _write_image(self, name, value=0.5, size=(4, 6)):
        write_png(os.path.join(self.dir, f'{name}.png'),
                  np.full((*size, 3), value))

    def test_round_trip(self):
        splits = make_synthetic_dataset(get_preset('two-primitives', 2),
                                        n_train=3, n_test=2, resolution=8,
                                        out_dir=self.dir)
        for split in ('train', 'val', 'test'):
            original = splits[split]
            loaded = load_dnerf(self.dir, split)
            self.assertEqual(len(loaded), len(original))
            self.assertEqual(loaded.split, split)
            np.testing.assert_array_equal(loaded.images, original.images)
            np.testing.assert_array_equal(loaded.times, original.times)
            np.testing.assert_allclose(loaded.poses, original.poses)
            self.assertAlmostEqual(loaded.focal, original.focal)

    def test_write_layout(self):
        splits = make_synthetic_dataset(get_preset('static-sphere'),
                                        n_train=2, n_test=0, resolution=4)
        path = write_dnerf(splits['train'], self.dir)
        self.assertEqual(path, os.path.join(self.dir,
                                            'transforms_train.json'))
        self.assertTrue(os.path.isfile(os.path.join(self.dir, 'train',
                                                    'r_001.png')))
        with open(path, 'r') as fp:
            transforms = json.load(fp)
        self.assertEqual(transforms['frames'][1]['file_path'],
                         './train/r_001')
        self.assertIn('scene_scale', transforms)

    def test_splits_share_train_normalization(self):
        target = np.array([0.3, 0.0, 0.0])

        def ring(radius, count, split):
            frames = []
            for k, angle in enumerate(np.linspace(0.0, 2.0 * np.pi, count,
                                                  endpoint=False)):
                offset = np.array([np.cos(angle), np.sin(angle), 0.3])
                eye = target + radius * offset / np.linalg.norm(offset)
                self._write_image(f'{split}/r_{k:03d}')
                frames.append({'file_path': f'./{split}/r_{k:03d}',
                               'time': k / count,
                               'transform_matrix': _pose(eye, target)})
            self._write_transforms(frames, split)
            return frames

        ring(4.0, 4, 'train')
        test_frames = ring(6.0, 3, 'test')

        train = load_dnerf(self.dir, 'train')
        alone = load_dnerf(self.dir, 'test')
        self.assertAlmostEqual(alone.normalization.scale,
                               train.normalization.scale * 4.0 / 6.0,
                               places=5)

        test = load_dnerf(self.dir, 'test',
                          normalization=train.normalization)
        self.assertIs(test.normalization, train.normalization)
        eye = np.array(test_frames[0]['transform_matrix'])[:3, 3]
        np.testing.assert_allclose(
            test.poses[0][:3, 3],
            (eye - train.normalization.center) * train.normalization.scale,
            atol=1e-9
        )

    def test_rays_carry_targets(self):
        self._write_image('train/a', 0.2)
        self._write_image('train/b', 0.8)
        self._write_transforms([
            {'file_path': './train/a', 'time': 0.0,
             'transform_matrix': _pose([0.0, -4.0, 0.0])},
            {'file_path': './train/b', 'time': 1.0,
             'transform_matrix': _pose([4.0, 0.0, 0.0])}
        ], scene_center=[0.0, 0.0, 0.0], scene_scale=0.5)
        dataset = load_dnerf(self.dir)
        self.assertEqual((dataset.height, dataset.width), (4, 6))
        np.testing.assert_allclose(dataset.poses[1][:3, 3], [2.0, 0.0, 0.0])

        batch = dataset.rays(np.array([0, 1]), np.array([[5, 3], [0, 0]]))
        np.testing.assert_allclose(batch.targets[0],
                                   np.full(3, 51 / 255.0))
        np.testing.assert_allclose(batch.targets[1],
                                   np.full(3, 204 / 255.0))
        np.testing.assert_array_equal(batch.times, [0.0, 1.0])
        np.testing.assert_allclose(np.linalg.norm(batch.directions, axis=-1),
                                   1.0)

    def test_downscale(self):
        self._write_image('train/a', 0.4, size=(8, 8))
        self._write_transforms([
            {'file_path': './train/a.png', 'time': 0.5,
             'transform_matrix': _pose([0.0, -4.0, 0.0])}
        ], scene_center=[0.0, 0.0, 0.0], scene_scale=1.0)
        dataset = load_dnerf(self.dir, downscale=2)
        self.assertEqual((dataset.height, dataset.width), (4, 4))
        with self.assertRaises(ConfigurationError):
            load_dnerf(self.dir, downscale=0)

    def test_missing_transforms(self):
        with self.assertRaises(DataError):
            load_dnerf(self.dir, 'val')

    def test_static_frames_rejected(self):
        self._write_image('train/a')
        self._write_transforms([
            {'file_path': './train/a',
             'transform_matrix': _pose([0.0, -4.0, 0.0])}
        ])
        with self.assertRaises(DataError):
            load_dnerf(self.dir)

    def test_missing_image(self):
        self._write_transforms([
            {'file_path': './train/nowhere', 'time': 0.5,
             'transform_matrix': _pose([0.0, -4.0, 0.0])}
        ], scene_center=[0.0, 0.0, 0.0], scene_scale=1.0)
        with self.assertRaises(DataError):
            load_dnerf(self.dir)

    def test_bad_pose(self):
        self._write_image('train/a')
        self._write_transforms([
            {'file_path': './train/a', 'time': 0.5,
             'transform_matrix': [[1.0, 0.0, 0.0]]}
        ])
        with self.assertRaises(DataError):
            load_dnerf(self.dir)

    def test_time_out_of_range(self):
        frame = Frame(np.zeros((2, 2, 3)), np.eye(4), 1.5, 'late')
        with self.assertRaises(DataError):
            DynamicDataset([frame], 0.7)

    def test_mixed_resolutions(self):
        frames = [
            Frame(np.zeros((2, 2, 3)), np.eye(4), 0.0, 'a'),
            Frame(np.zeros((4, 2, 3)), np.eye(4), 0.5, 'b')
        ]
        with self.assertRaises(DataError):
            DynamicDataset(frames, 0.7)


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestImages,
        TestNormalization,
        TestDnerfFormat
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
