from __future__ import annotations
import os
import math
import logging
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from src.autodiff.tensor import Tape, precision
from src.autodiff.parameters import GROUPS
from src.config import TrainConfig
from src.data.dataset import DynamicDataset
from src.data.metrics import psnr, psnr_from_mse
from src.exceptions import ConfigurationError, NonFiniteError
from src.model import SLS4DModel
from src.renderer import (
    RayBatch,
    OccupancyGrid,
    update_occupancy,
    render_rays,
    render_image,
    write_png
)
from src.training.schedule import ScheduleState, lr_factor_for
from src.training.optimizer import Adam
from src.training.loss import total_loss
from src.training.checkpoint import Checkpoint, save_checkpoint
from src.training.metrics_log import MetricsLogger


logger = logging.getLogger(__name__)


CHECKPOINT_NAME = 'checkpoint.sls4d'
METRICS_NAME = 'metrics.ndjson'
PSNR_SMOOTHING = 0.9


@dataclass
class StepResult:
    step: int
    loss: float
    loss_color: float
    loss_tv: float
    lr_factor: float
    psnr: float


@dataclass
class TrainResult:
    step: int
    checkpoint_path: str
    metrics_path: str
    last: StepResult | None


class Trainer:
    """Owns everything a run mutates: model parameters, optimiser
    moments, schedule step, ray-sampling generator and occupancy grid.

    Checkpoints capture all of it, so a resumed run replays the same
    losses as an uninterrupted one.
    """

    def __init__(self,
                 cfg: TrainConfig,
                 dataset: DynamicDataset,
                 val_dataset: DynamicDataset | None=None,
                 model: SLS4DModel | None=None):
        if dataset is None or len(dataset) == 0:
            logger.error('training dataset is empty')
            raise ConfigurationError('training dataset is empty',
                                     field='dataset')
        self.cfg = cfg
        self.dataset = dataset
        self.val_dataset = val_dataset
        self.model = model or SLS4DModel.from_config(cfg)
        self.optimizer = Adam(self.model.store, cfg.beta1, cfg.beta2,
                              cfg.eps)
        self.state = ScheduleState()
        self.rng = np.random.default_rng([cfg.seed, 1])
        self.occ = None
        if cfg.occupancy.enabled:
            self.occ = OccupancyGrid.from_config(cfg.occupancy)
        self.background = np.asarray(dataset.background, dtype=np.float64)
        self.running_mse: float | None = None

    @classmethod
    def from_checkpoint(cls,
                        ckpt: Checkpoint,
                        dataset: DynamicDataset,
                        val_dataset: DynamicDataset | None=None,
                        cfg: TrainConfig | None=None) -> Trainer:
        """Rebuilds a trainer from `ckpt`; `cfg` replaces the embedded
        configuration when given."""

        cfg = cfg or TrainConfig.from_json(ckpt.config)
        trainer = cls(cfg, dataset, val_dataset)
        trainer.model.store.load_state_dict(ckpt.params)
        trainer.optimizer.load_state_dict(ckpt.moments, ckpt.adam_t)
        trainer.state.step = ckpt.step
        if ckpt.rng_state is not None:
            trainer.rng.bit_generator.state = ckpt.rng_state
        if trainer.occ is not None and ckpt.occupancy is not None:
            trainer.occ.load_state(ckpt.occupancy)
        trainer.running_mse = ckpt.extra.get('running_mse')
        logger.info(f'resumed training at step {ckpt.step}')
        return trainer

    @property
    def step(self) -> int:
        return self.state.step

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            config=self.cfg.to_json(),
            step=self.state.step,
            params=self.model.store.state_dict(),
            moments=self.optimizer.state_dict(),
            occupancy=None if self.occ is None else self.occ.state(),
            rng_state=self.rng.bit_generator.state,
            adam_t=self.optimizer.t,
            extra={
                'running_mse': self.running_mse,
                'normalization': self.dataset.normalization.to_json()
            }
        )

    def sample_batch(self, size: int | None=None) -> RayBatch:
        """Rays drawn uniformly over every (frame, pixel) pair."""

        size = size or self.cfg.ray_batch_size
        n_pixels = self.dataset.width * self.dataset.height
        index = self.rng.integers(0, len(self.dataset) * n_pixels, size=size)
        frame = index // n_pixels
        pixel = index % n_pixels
        pixels = np.stack([pixel % self.dataset.width,
                           pixel // self.dataset.width], axis=-1)
        return self.dataset.rays(frame, pixels)

    def _dump_batch(self, batch: RayBatch, step: int) -> str:
        os.makedirs(self.cfg.output_dir, exist_ok=True)
        path = os.path.join(self.cfg.output_dir,
                            f'nonfinite_step{step:06d}.npz')
        np.savez(path, origins=batch.origins, directions=batch.directions,
                 near=batch.near, far=batch.far, times=batch.times,
                 targets=batch.targets)
        return path

    def update_occupancy(self, step: int) -> None:
        if self.occ is None or step % self.occ.cadence != 0:
            return
        update_occupancy(self.model, self.occ, step,
                         rng=np.random.default_rng([self.cfg.seed, 2, step]),
                         block_size=self.cfg.render.block_size)

    def train_step(self, batch: RayBatch, stratified: bool=True
                  ) -> StepResult:
        """One forward, backward and optimiser update on `batch`.

        The update taken is step s = previous step + 1, with every group
        stepping at base_lr(group) * lr_factor(s).
        """

        if batch.targets is None:
            raise ConfigurationError('training rays need target colours',
                                     field='batch')
        cfg = self.cfg
        s = self.state.step + 1
        factor = lr_factor_for(s, cfg)
        store = self.model.store
        store.zero_grad()

        try:
            with Tape() as tape:
                result = render_rays(self.model, batch,
                                     cfg.render.n_samples, self.background,
                                     stratified=stratified, rng=self.rng,
                                     occ=self.occ)
                tv = None
                if not cfg.ablation.no_tv_loss:
                    tv = self.model.tv_loss(squared=cfg.tv_squared)
                terms = total_loss(result.rgb, batch.targets, tv, cfg.w_c,
                                   cfg.w_t)
            if not math.isfinite(terms.value):
                raise NonFiniteError(op='loss')
            tape.backward(terms.total)
        except NonFiniteError as err:
            dump_path = self._dump_batch(batch, s)
            logger.error(f'non-finite value from {err.op} at step {s},'
                         f' batch dumped to {dump_path}')
            raise NonFiniteError(op=err.op, dump_path=dump_path) from err

        self.optimizer.step({
            group: cfg.base_lr(group) * factor
                for group
                in GROUPS
        })
        self.state.step = s

        mse = float(np.mean((result.rgb.data - batch.targets) ** 2))
        if self.running_mse is None:
            self.running_mse = mse
        else:
            self.running_mse = PSNR_SMOOTHING * self.running_mse \
                + (1.0 - PSNR_SMOOTHING) * mse
        return StepResult(s, terms.value, terms.color,
                          terms.tv if tv is not None else 0.0, factor,
                          psnr_from_mse(self.running_mse))

    def validate(self, step: int) -> tuple[float, str] | None:
        """Renders one validation frame; returns its PSNR and file path."""

        if not self.val_dataset:
            return None
        index = (step // self.cfg.validate_every - 1) % len(self.val_dataset)
        frame = self.val_dataset.frames[index]
        image = render_image(self.model, self.val_dataset.camera(index),
                             frame.time, self.cfg.render.n_samples,
                             self.background,
                             chunk_size=self.cfg.render.chunk_size,
                             block_size=self.cfg.render.block_size,
                             occ=self.occ)
        value = psnr(image, frame.image)
        write_png(os.path.join(self.cfg.output_dir, 'validation',
                               f'step_{step:06d}.png'), image)
        logger.info(f'validation at step {step}: {frame.file_path}'
                    f' PSNR {value:.2f} dB')
        return value, frame.file_path

    def run(self, until: int | None=None) -> TrainResult:
        """Trains up to step `until` (default N_m)."""

        cfg = self.cfg
        stop = cfg.N_m if until is None else min(until, cfg.N_m)
        start = self.state.step
        os.makedirs(cfg.output_dir, exist_ok=True)
        cfg.dump(os.path.join(cfg.output_dir, 'config.json'))
        metrics_path = os.path.join(cfg.output_dir, METRICS_NAME)
        checkpoint_path = os.path.join(cfg.output_dir, CHECKPOINT_NAME)
        logger.info(f'training steps {start + 1} to {stop}'
                    f' on {len(self.dataset)} frames')

        last = None
        with precision(cfg.precision), \
                MetricsLogger(metrics_path, append=start > 0) as metrics:
            for s in tqdm(range(start + 1, stop + 1), initial=start,
                          total=stop, desc='training', disable=None):
                self.update_occupancy(s)
                last = self.train_step(self.sample_batch())
                if s % cfg.log_every == 0 or s == stop:
                    metrics.log_step(last.step, last.loss, last.loss_color,
                                     last.loss_tv, last.lr_factor, last.psnr)
                    logger.info(f'step {s}: loss {last.loss:.6f},'
                                f' lr factor {last.lr_factor:.4f},'
                                f' PSNR {last.psnr:.2f} dB')
                if cfg.validate_every and s % cfg.validate_every == 0:
                    validation = self.validate(s)
                    if validation is not None:
                        metrics.log_validation(s, *validation)
                if (cfg.checkpoint_every and s % cfg.checkpoint_every == 0) \
                        or s == stop:
                    save_checkpoint(checkpoint_path, self.checkpoint())

        if last is None and not os.path.exists(checkpoint_path):
            save_checkpoint(checkpoint_path, self.checkpoint())
        return TrainResult(self.state.step, checkpoint_path, metrics_path,
                           last)


def train(dataset: DynamicDataset,
          cfg: TrainConfig,
          val_dataset: DynamicDataset | None=None,
          resume: Checkpoint | None=None,
          until: int | None=None) -> TrainResult:
    """Runs (or resumes) a training run and returns where it was saved."""

    if resume is not None:
        trainer = Trainer.from_checkpoint(resume, dataset, val_dataset, cfg)
    else:
        trainer = Trainer(cfg, dataset, val_dataset)
    return trainer.run(until)


def restore_model(ckpt: Checkpoint
                 ) -> tuple[TrainConfig, SLS4DModel, OccupancyGrid | None]:
    """Configuration, model and occupancy grid stored in `ckpt`."""

    cfg = TrainConfig.from_json(ckpt.config)
    model = SLS4DModel.from_config(cfg)
    model.store.load_state_dict(ckpt.params)
    occ = None
    if cfg.occupancy.enabled and ckpt.occupancy is not None:
        occ = OccupancyGrid.from_config(cfg.occupancy)
        occ.load_state(ckpt.occupancy)
    return cfg, model, occ
