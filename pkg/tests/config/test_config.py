import os
import json
import tempfile
import unittest as ut
from unittest import mock

from src import _ROOT
from src.config import (
    AppConfig,
    TrainConfig,
    AblationConfig,
    load_config,
    resolve_config,
    default_config_json
)
from src.exceptions import ConfigurationError
from tests.utils import get_test_methods


class TestDefaults(ut.TestCase):
    def test_defaults(self):
        cfg = load_config()
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.precision, 32)
        self.assertEqual((cfg.N_w, cfg.N_m), (2000, 30000))
        self.assertEqual((cfg.model.B, cfg.model.F), (256, 64))
        self.assertEqual((cfg.model.T, cfg.model.F_t), (256, 64))
        self.assertEqual(cfg.model.L_spatial, 10)
        self.assertEqual(cfg.model.heads * cfg.model.d_h, 256)
        self.assertEqual(cfg.ablation, AblationConfig())
        self.assertAlmostEqual(cfg.w_t, 1e-4)
        self.assertEqual(cfg.render.n_samples, 192)
        self.assertTrue(cfg.occupancy.enabled)

    def test_root_placeholder(self):
        cfg = load_config()
        self.assertNotIn('<ROOT>', cfg.output_dir)
        self.assertEqual(cfg.output_dir,
                         os.path.normpath(os.path.join(_ROOT, '..', 'outputs',
                                                       'run')))

    def test_learning_rate_tiers(self):
        cfg = load_config()
        self.assertEqual(cfg.base_lr('attention'), cfg.base_lr_early)
        self.assertEqual(cfg.base_lr('feature_space'), cfg.base_lr_early)
        self.assertEqual(cfg.base_lr('time_slots'), cfg.base_lr_late)
        self.assertEqual(cfg.base_lr('deformation'), cfg.base_lr_late)

    def test_json_round_trip(self):
        cfg = load_config(overrides={
            'seed': 9,
            'model': {'B': 32, 'query_with_time': True},
            'ablation': {'decoder': 'mlp', 'shared_codebook': True}
        })
        self.assertEqual(TrainConfig.from_json(cfg.to_json()), cfg)
        resolved = resolve_config(cfg.to_json())
        self.assertEqual(resolved['model']['B'], 32)

    def test_defaults_pass_schema(self):
        self.assertEqual(resolve_config(), default_config_json())


class TestValidation(ut.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def assertInvalid(self, overrides, field):
        with self.assertRaises(ConfigurationError) as cm:
            load_config(overrides=overrides)
        self.assertEqual(cm.exception.field, field)

    def test_schema_errors_name_field(self):
        self.assertInvalid({'model': {'B': 0}}, 'model.B')
        self.assertInvalid({'precision': 16}, 'precision')
        self.assertInvalid({'ablation': {'decay': 'linear'}},
                           'ablation.decay')
        self.assertInvalid({'optimizer': {'lr_tiers': {'mlp_late': 'mid'}}},
                           'optimizer.lr_tiers.mlp_late')

    def test_unknown_key(self):
        self.assertInvalid({'model': {'width': 3}}, 'model')

    def test_schedule_constants(self):
        self.assertInvalid({'optimizer': {'N_w': 500, 'N_m': 500}},
                           'optimizer.N_w')
        self.assertInvalid({'optimizer': {'N_w': 0}}, 'optimizer.N_w')

    def test_loss_weights(self):
        self.assertInvalid({'loss': {'w_c': 0.0}}, 'loss.w_c')
        self.assertInvalid({'loss': {'w_t': -1.0}}, 'loss.w_t')

    def test_from_file(self):
        path = os.path.join(self.tmp.name, 'run.json')
        with open(path, 'w') as fp:
            json.dump({'seed': 4, 'optimizer': {'N_m': 4000}}, fp)
        cfg = load_config(path, overrides={'optimizer': {'N_w': 100}})
        self.assertEqual(cfg.seed, 4)
        self.assertEqual((cfg.N_w, cfg.N_m), (100, 4000))

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_config(os.path.join(self.tmp.name, 'absent.json'))

    def test_unreadable_file(self):
        path = os.path.join(self.tmp.name, 'broken.json')
        with open(path, 'w') as fp:
            fp.write('{"seed": ')
        with self.assertRaises(ConfigurationError):
            load_config(path)


class TestAppConfig(ut.TestCase):
    def test_threads_from_environment(self):
        with mock.patch.dict(os.environ, {'SLS4D_THREADS': '3'}):
            self.assertEqual(AppConfig().threads, 3)
        with mock.patch.dict(os.environ, {'SLS4D_THREADS': '0'}):
            self.assertEqual(AppConfig().threads, 1)

    def test_bad_threads(self):
        with mock.patch.dict(os.environ, {'SLS4D_THREADS': 'many'}):
            with self.assertRaises(ConfigurationError) as cm:
                AppConfig()
        self.assertEqual(cm.exception.field, 'SLS4D_THREADS')


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestDefaults,
        TestValidation,
        TestAppConfig
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
