__all__ = [
    'ScheduleState',
    'lr_factor',
    'lr_factor_for',
    'Adam',
    'LossTerms',
    'color_loss',
    'total_loss',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'FORMAT_VERSION',
    'MetricsLogger',
    'read_metrics_log',
    'StepResult',
    'TrainResult',
    'Trainer',
    'train',
    'restore_model'
]


from src.training.schedule import ScheduleState, lr_factor, lr_factor_for
from src.training.optimizer import Adam
from src.training.loss import LossTerms, color_loss, total_loss
from src.training.checkpoint import (
    Checkpoint,
    save_checkpoint,
    load_checkpoint,
    FORMAT_VERSION
)
from src.training.metrics_log import MetricsLogger, read_metrics_log
from src.training.trainer import (
    StepResult,
    TrainResult,
    Trainer,
    train,
    restore_model
)
