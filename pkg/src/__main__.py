import os
import sys
import json
import math
import logging
import argparse as ap
from typing import Any

import numpy as np

from src.autodiff import precision
from src.config import TrainConfig, app_config, load_config, resolve_config
from src.data import (
    DynamicDataset,
    load_dnerf,
    get_preset,
    make_synthetic_dataset,
    psnr,
    ssim,
    ms_ssim,
    ms_ssim_min_size
)
from src.data.dataset import WHITE, BLACK, SceneNormalization
from src.diagnostics import probe_ray, probe_points, run_suite
from src.exceptions import ConfigurationError, UsageError
from src.model import SLS4DModel
from src.renderer import OccupancyGrid, render_image, write_png, write_raw
from src.training import load_checkpoint, train, restore_model
from src.utils import perror, deep_merge


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _json_number(value: float) -> float | str:
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def _out_dir(args: ap.Namespace, default: str) -> str:
    out = getattr(args, 'out', None) or default
    os.makedirs(out, exist_ok=True)
    return out


def _background(cfg: TrainConfig) -> np.ndarray:
    return WHITE.copy() if cfg.dataset.white_background else BLACK.copy()


def _dataset(cfg: TrainConfig, split: str, required: bool=True,
             normalization: SceneNormalization | None=None
            ) -> DynamicDataset | None:
    directory = cfg.dataset.dir
    if directory is None:
        raise ConfigurationError('no dataset directory configured',
                                 field='dataset.dir')
    if not required and not os.path.isfile(
            os.path.join(directory, f'transforms_{split}.json')):
        return None
    return load_dnerf(directory, split, background=_background(cfg),
                      downscale=cfg.dataset.downscale,
                      normalization=normalization)


def _restore(args: ap.Namespace
            ) -> tuple[TrainConfig, SLS4DModel, OccupancyGrid | None,
                       DynamicDataset]:
    """Loads the checkpoint and the requested split, mapped into the box
    the model was trained in."""

    ckpt = load_checkpoint(args.checkpoint)
    cfg, model, occ = restore_model(ckpt)
    if 'normalization' in ckpt.extra:
        normalization = SceneNormalization.from_json(
            ckpt.extra['normalization']
        )
    else:
        normalization = _dataset(cfg, 'train').normalization
    return cfg, model, occ, _dataset(cfg, args.split,
                                     normalization=normalization)


def _frames(args: ap.Namespace, dataset: DynamicDataset) -> list[int]:
    if args.frame is None:
        return list(range(len(dataset)))
    if not 0 <= args.frame < len(dataset):
        raise UsageError(f'frame {args.frame} is out of range for the'
                         f' {dataset.split} split ({len(dataset)} frames)')
    return [args.frame]


def run_train(args: ap.Namespace) -> int:
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.out is not None:
        overrides['output_dir'] = args.out
    if args.steps is not None:
        overrides['optimizer'] = {'N_m': args.steps}
    if args.config is not None and not os.path.isfile(args.config):
        raise UsageError(f'no config file at {args.config}')
    cfg = load_config(args.config, overrides)

    resume = None
    if args.checkpoint is not None:
        resume = load_checkpoint(args.checkpoint)
        cfg = TrainConfig.from_json(
            resolve_config(deep_merge(resume.config, overrides))
        )

    dataset = _dataset(cfg, 'train')
    val_dataset = _dataset(cfg, 'val', required=False,
                           normalization=dataset.normalization)
    result = train(dataset, cfg, val_dataset, resume=resume)
    print(f'trained to step {result.step}; checkpoint at'
          f' {result.checkpoint_path}')
    return EXIT_OK


def run_render(args: ap.Namespace) -> int:
    cfg, model, occ, dataset = _restore(args)
    out = _out_dir(args, os.path.join(cfg.output_dir, 'renders'))
    background = _background(cfg)

    with precision(cfg.precision):
        for index in _frames(args, dataset):
            frame = dataset.frames[index]
            time = frame.time if args.time is None else args.time
            image = render_image(model, dataset.camera(index), time,
                                 cfg.render.n_samples_eval, background,
                                 chunk_size=cfg.render.chunk_size,
                                 block_size=cfg.render.block_size, occ=occ)
            stem = os.path.join(out, f'{args.split}_{index:03d}')
            write_png(f'{stem}.png', image)
            write_raw(f'{stem}.raw', image)
            print(f'{stem}.png')
    return EXIT_OK


def run_eval(args: ap.Namespace) -> int:
    cfg, model, occ, dataset = _restore(args)
    out = _out_dir(args, cfg.output_dir)
    background = _background(cfg)
    with_ms_ssim = min(dataset.height, dataset.width) >= ms_ssim_min_size()
    if not with_ms_ssim:
        logger.warning(f'images of {dataset.width}x{dataset.height} are too'
                       ' small for MS-SSIM; it is reported as null')

    per_image = []
    psnrs, ssims, ms_ssims = [], [], []
    with precision(cfg.precision):
        for index, frame in enumerate(dataset.frames):
            image = render_image(model, dataset.camera(index), frame.time,
                                 cfg.render.n_samples_eval, background,
                                 chunk_size=cfg.render.chunk_size,
                                 block_size=cfg.render.block_size, occ=occ)
            p = psnr(image, frame.image)
            s = ssim(image, frame.image)
            psnrs.append(p)
            ssims.append(s)
            if with_ms_ssim:
                ms_ssims.append(ms_ssim(image, frame.image))
            per_image.append({
                'name': os.path.basename(frame.file_path),
                'psnr': _json_number(p),
                'ssim': s
            })

    summary = {
        'split': args.split,
        'per_image': per_image,
        'mean_psnr': _json_number(float(np.mean(psnrs))),
        'mean_ssim': float(np.mean(ssims)),
        'mean_ms_ssim': float(np.mean(ms_ssims)) if ms_ssims else None
    }
    path = os.path.join(out, f'eval_{args.split}.json')
    with open(path, 'w') as fp:
        json.dump(summary, fp, indent=4)
    print(json.dumps({key: summary[key] for key in summary
                      if key != 'per_image'}))
    logger.info(f'wrote evaluation summary to {path}')
    return EXIT_OK


def run_make_synthetic(args: ap.Namespace) -> int:
    spec = get_preset(args.preset, seed=args.seed or 0)
    out = _out_dir(args, os.path.join(app_config.ensure_output_path(),
                                      args.preset))
    datasets = make_synthetic_dataset(spec, n_train=args.n_train,
                                      n_test=args.n_test,
                                      resolution=args.resolution,
                                      out_dir=out)
    sizes = ', '.join(f'{split} {len(dataset)}'
                      for split, dataset in datasets.items())
    print(f'wrote {args.preset} to {out} ({sizes})')
    return EXIT_OK


def run_inspect(args: ap.Namespace) -> int:
    cfg, model, _, dataset = _restore(args)
    out = _out_dir(args, os.path.join(cfg.output_dir, 'probes'))
    index = _frames(args, dataset)[0]
    if args.pixel is None:
        pixel = np.array([[dataset.width // 2, dataset.height // 2]])
    else:
        pixel = np.array([args.pixel])
    if not (0 <= pixel[0, 0] < dataset.width
            and 0 <= pixel[0, 1] < dataset.height):
        raise UsageError(f'pixel {pixel[0].tolist()} lies outside the'
                         f' {dataset.width}x{dataset.height} image')

    rays = dataset.rays(np.array([index]), pixel)
    if args.time is not None:
        rays.times[:] = args.time
    stem = os.path.join(out, f'{args.split}_{index:03d}'
                             f'_x{pixel[0, 0]}_y{pixel[0, 1]}')
    with precision(cfg.precision):
        report = probe_ray(model, rays.ray(0), ray_id=os.path.basename(stem))
        report.to_csv(f'{stem}.csv')
        for channel in report.attention:
            report.write_weight_png(f'{stem}_{channel}.png', channel)
        points = probe_points(model, report.points, report.ray.time)
        points.to_frame().to_csv(f'{stem}_points.csv', index=False)
    print(f'{stem}.csv')
    return EXIT_OK


def run_gradcheck(args: ap.Namespace) -> int:
    results = run_suite(seed=42 if args.seed is None else args.seed)
    for result in results:
        print(result)
    return EXIT_OK if all(result.passed for result in results) \
        else EXIT_FAILURE


def run_test(args: ap.Namespace) -> int:
    import tests.main as tests

    ok = tests.main(*(args.unit or ['all']))
    return EXIT_OK if ok else EXIT_FAILURE


COMMANDS = {
    'train': run_train,
    'render': run_render,
    'eval': run_eval,
    'make-synthetic': run_make_synthetic,
    'inspect': run_inspect,
    'gradcheck': run_gradcheck,
    'test': run_test
}


def main(args: ap.Namespace) -> int:
    """Runs one subcommand and maps failures to exit codes."""

    try:
        command = COMMANDS[args.command]
    except KeyError:
        perror(f'unknown command: {args.command}')
        return EXIT_USAGE

    try:
        return command(args)
    except UsageError as err:
        perror(f'usage error: {err}')
        return EXIT_USAGE
    except KeyboardInterrupt:
        perror(f'{args.command} interrupted')
        return EXIT_FAILURE
    except Exception as err:
        logger.exception(f'{args.command} failed')
        perror(f'An unhandled error occurred during {args.command}:\n',
               f'{err.__class__.__name__}: {err}')
        return EXIT_FAILURE


if __name__ == '__main__':
    from cli import parse_args

    sys.exit(main(parse_args()))
