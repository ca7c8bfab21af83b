__all__ = [
    'AppConfig',
    'app_config',
    'TrainConfig',
    'DatasetConfig',
    'ModelConfig',
    'AblationConfig',
    'RenderConfig',
    'OccupancyConfig',
    'load_config',
    'resolve_config',
    'default_config_json'
]


from src.config.config import (
    AppConfig,
    app_config,
    TrainConfig,
    DatasetConfig,
    ModelConfig,
    AblationConfig,
    RenderConfig,
    OccupancyConfig,
    load_config,
    resolve_config,
    default_config_json
)
