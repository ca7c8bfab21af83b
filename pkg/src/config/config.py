from __future__ import annotations
import os
import json
import logging
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Literal

import jsonschema

import src
from src import _ROOT
from src.utils import JSONObject, deep_merge
from src.exceptions import ConfigurationError


logger = logging.getLogger(__name__)


class AppConfig(JSONObject):
    """Application settings shared by every run (`config/config.json`)."""

    def __init__(self):
        config_path = src.get_path('config', 'config.json')
        with open(config_path, 'r') as config_fp:
            _json = json.load(config_fp)
        JSONObject.__init__(self, _json)

        output_path = self.get('output_path', str)
        output_path = output_path.replace('<ROOT>', _ROOT, 1)
        self.output_path = os.path.normpath(output_path)

        self.threads = self.get('threads', int, 1)
        env_threads = os.environ.get('SLS4D_THREADS')
        if env_threads is not None:
            try:
                self.threads = int(env_threads)
            except ValueError:
                raise ConfigurationError(
                    f'SLS4D_THREADS must be an integer, got {env_threads}',
                    field='SLS4D_THREADS'
                )
        self.threads = max(1, self.threads)

    def ensure_output_path(self) -> str:
        os.makedirs(self.output_path, exist_ok=True)
        return self.output_path


app_config = AppConfig()


@dataclass
class DatasetConfig:
    dir: str | None = None
    white_background: bool = True
    downscale: int = 1

    @classmethod
    def from_json(cls, obj: JSONObject) -> DatasetConfig:
        return cls(
            dir=obj.get('dir', str | None, None),
            white_background=obj.get('white_background', bool, True),
            downscale=obj.get('downscale', int, 1)
        )


@dataclass
class ModelConfig:
    B: int = 256
    F: int = 64
    T: int = 256
    F_t: int = 64
    L_spatial: int = 10
    L_time: int = 6
    L_view: int = 4
    include_input: bool = True
    heads: int = 8
    d_h: int = 32
    decoder_width: int = 128
    decoder_out: int = 512
    density_width: int = 64
    deform_width: int = 256
    deform_depth: int = 7
    query_with_time: bool = False
    grid_resolution: int = 32
    zero_init_heads: bool = False

    @classmethod
    def from_json(cls, obj: JSONObject) -> ModelConfig:
        kwargs = {}
        for _field in dataclasses.fields(cls):
            _type = bool if _field.type == 'bool' else int
            if _field.name in obj.json:
                kwargs[_field.name] = obj.get(_field.name, _type)
        return cls(**kwargs)


@dataclass
class AblationConfig:
    no_deformation: bool = False
    no_time_slots: bool = False
    no_tv_loss: bool = False
    decay: Literal['cos', 'exp', 'cos_exp'] = 'cos_exp'
    decoder: Literal['geglu', 'gelu', 'mlp'] = 'geglu'
    shared_codebook: bool = False
    literal_attention_scaling: bool = False
    feature_space: Literal['latent', 'grid'] = 'latent'

    @classmethod
    def from_json(cls, obj: JSONObject) -> AblationConfig:
        return cls(
            no_deformation=obj.get('no_deformation', bool, False),
            no_time_slots=obj.get('no_time_slots', bool, False),
            no_tv_loss=obj.get('no_tv_loss', bool, False),
            decay=obj.get('decay', str, 'cos_exp'),
            decoder=obj.get('decoder', str, 'geglu'),
            shared_codebook=obj.get('shared_codebook', bool, False),
            literal_attention_scaling=obj.get('literal_attention_scaling', bool, False),
            feature_space=obj.get('feature_space', str, 'latent')
        )


@dataclass
class RenderConfig:
    n_samples: int = 192
    n_samples_eval: int = 512
    chunk_size: int = 4096
    block_size: int = 65536

    @classmethod
    def from_json(cls, obj: JSONObject) -> RenderConfig:
        return cls(
            n_samples=obj.get('n_samples', int, 192),
            n_samples_eval=obj.get('n_samples_eval', int, 512),
            chunk_size=obj.get('chunk_size', int, 4096),
            block_size=obj.get('block_size', int, 65536)
        )


@dataclass
class OccupancyConfig:
    enabled: bool = True
    resolution: int = 64
    threshold: float = 0.01
    cadence: int = 500
    n_times: int = 8

    @classmethod
    def from_json(cls, obj: JSONObject) -> OccupancyConfig:
        return cls(
            enabled=obj.get('enabled', bool, True),
            resolution=obj.get('resolution', int, 64),
            threshold=obj.get('threshold', float, 0.01),
            cadence=obj.get('cadence', int, 500),
            n_times=obj.get('n_times', int, 8)
        )


def _default_tiers() -> dict[str, str]:
    return {
        'feature_space': 'early',
        'attention': 'early',
        'mlp_early': 'early',
        'mlp_late': 'late',
        'deformation': 'late',
        'time_slots': 'late'
    }


@dataclass
class TrainConfig:
    """Every hyperparameter of a run.

    Built from `defaults.json` merged with a user file. `to_json` emits
    the fully resolved document, which is also what checkpoints embed.
    """

    seed: int = 0
    precision: int = 32
    output_dir: str = 'outputs/run'
    w_c: float = 1.0
    w_t: float = 1e-4
    tv_squared: bool = False
    base_lr_early: float = 1e-4
    base_lr_late: float = 1e-3
    lr_tiers: dict[str, str] = field(default_factory=_default_tiers)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    N_w: int = 2000
    N_m: int = 30000
    literal_schedule: bool = False
    ray_batch_size: int = 4096
    log_every: int = 50
    validate_every: int = 1000
    checkpoint_every: int = 1000
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    ablation: AblationConfig = field(default_factory=AblationConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    occupancy: OccupancyConfig = field(default_factory=OccupancyConfig)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.w_c > 0:
            raise ConfigurationError(f'w_c must be positive, got {self.w_c}',
                                     field='loss.w_c')
        if not self.w_t >= 0:
            raise ConfigurationError(
                f'w_t must be nonnegative, got {self.w_t}', field='loss.w_t'
            )
        if not 0 < self.N_w < self.N_m:
            raise ConfigurationError(
                f'expected 0 < N_w < N_m, got N_w={self.N_w},'
                f' N_m={self.N_m}', field='optimizer.N_w'
            )
        if self.precision not in (32, 64):
            raise ConfigurationError(
                f'precision must be 32 or 64, got {self.precision}',
                field='precision'
            )
        missing = set(_default_tiers()) - set(self.lr_tiers)
        if missing:
            raise ConfigurationError(
                f'lr_tiers has no entry for {sorted(missing)}',
                field='optimizer.lr_tiers'
            )
        for group, tier in self.lr_tiers.items():
            if tier not in ('early', 'late'):
                raise ConfigurationError(
                    f'unknown tier {tier} for group {group}',
                    field='optimizer.lr_tiers'
                )

    def base_lr(self, group: str) -> float:
        match self.lr_tiers[group]:
            case 'early':
                return self.base_lr_early
            case _:
                return self.base_lr_late

    def replace(self, **changes: Any) -> TrainConfig:
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_json(cls, _json: dict[str, Any]) -> TrainConfig:
        obj = JSONObject(_json)
        loss = obj.section('loss')
        optimizer = obj.section('optimizer')
        logging_ = obj.section('logging')

        output_dir = obj.get('output_dir', str, 'outputs/run')
        output_dir = os.path.normpath(output_dir.replace('<ROOT>', _ROOT, 1))
        return cls(
            seed=obj.get('seed', int, 0),
            precision=obj.get('precision', int, 32),
            output_dir=output_dir,
            w_c=loss.get('w_c', float, 1.0),
            w_t=loss.get('w_t', float, 1e-4),
            tv_squared=loss.get('tv_squared', bool, False),
            base_lr_early=optimizer.get('base_lr_early', float, 1e-4),
            base_lr_late=optimizer.get('base_lr_late', float, 1e-3),
            lr_tiers=optimizer.get('lr_tiers', dict[str, str],
                                   _default_tiers()),
            beta1=optimizer.get('beta1', float, 0.9),
            beta2=optimizer.get('beta2', float, 0.999),
            eps=optimizer.get('eps', float, 1e-8),
            N_w=optimizer.get('N_w', int, 2000),
            N_m=optimizer.get('N_m', int, 30000),
            literal_schedule=optimizer.get('literal_schedule', bool, False),
            ray_batch_size=optimizer.get('ray_batch_size', int, 4096),
            log_every=logging_.get('log_every', int, 50),
            validate_every=logging_.get('validate_every', int, 1000),
            checkpoint_every=logging_.get('checkpoint_every', int, 1000),
            dataset=DatasetConfig.from_json(obj.section('dataset')),
            model=ModelConfig.from_json(obj.section('model')),
            ablation=AblationConfig.from_json(obj.section('ablation')),
            render=RenderConfig.from_json(obj.section('render')),
            occupancy=OccupancyConfig.from_json(obj.section('occupancy'))
        )

    def to_json(self) -> dict[str, Any]:
        return {
            'seed': self.seed,
            'precision': self.precision,
            'output_dir': self.output_dir,
            'dataset': dataclasses.asdict(self.dataset),
            'model': dataclasses.asdict(self.model),
            'loss': {
                'w_c': self.w_c,
                'w_t': self.w_t,
                'tv_squared': self.tv_squared
            },
            'optimizer': {
                'base_lr_early': self.base_lr_early,
                'base_lr_late': self.base_lr_late,
                'lr_tiers': dict(self.lr_tiers),
                'beta1': self.beta1,
                'beta2': self.beta2,
                'eps': self.eps,
                'N_w': self.N_w,
                'N_m': self.N_m,
                'literal_schedule': self.literal_schedule,
                'ray_batch_size': self.ray_batch_size
            },
            'render': dataclasses.asdict(self.render),
            'occupancy': dataclasses.asdict(self.occupancy),
            'logging': {
                'log_every': self.log_every,
                'validate_every': self.validate_every,
                'checkpoint_every': self.checkpoint_every
            },
            'ablation': dataclasses.asdict(self.ablation)
        }

    def dump(self, path: str) -> None:
        with open(path, 'w') as fp:
            json.dump(self.to_json(), fp, indent=4)


def _read_json(path: str) -> dict[str, Any]:
    try:
        with open(path, 'r') as fp:
            return json.load(fp)
    except json.JSONDecodeError as err:
        raise ConfigurationError(f'{path} is not valid JSON: {err}') from err


def default_config_json() -> dict[str, Any]:
    return _read_json(src.get_path('config', 'defaults.json'))


def resolve_config(user_json: dict[str, Any] | None=None) -> dict[str, Any]:
    """Merges `user_json` over the defaults and validates the result."""

    resolved = deep_merge(default_config_json(), user_json or {})
    schema = _read_json(src.get_path('config', 'config.schema.json'))
    try:
        jsonschema.validate(resolved, schema)
    except jsonschema.ValidationError as err:
        location = '.'.join(str(part) for part in err.absolute_path)
        logger.error(f'invalid configuration at {location}: {err.message}')
        raise ConfigurationError(err.message, field=location or 'config') \
            from err
    return resolved


def load_config(path: str | None=None,
                overrides: dict[str, Any] | None=None) -> TrainConfig:
    """Builds a `TrainConfig` from an optional JSON file and overrides."""

    user_json: dict[str, Any] = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigurationError(f'no config file at {path}',
                                     field='config')
        user_json = _read_json(path)
    if overrides:
        user_json = deep_merge(user_json, overrides)
    config = TrainConfig.from_json(resolve_config(user_json))
    logger.info(f'loaded configuration (seed {config.seed},'
                f' N_m {config.N_m})')
    return config
