import sys
import argparse as ap

import src.__main__ as src
from src.data import PRESETS, SPLITS


def valid_time(value: str) -> float:
    """Time validator for `argparse` arguments."""

    try:
        time = float(value)
    except ValueError:
        raise ap.ArgumentTypeError(f'not a number: {value}')
    if not 0.0 <= time <= 1.0:
        raise ap.ArgumentTypeError(f'time must lie in [0, 1], got {value}')
    return time


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise ap.ArgumentTypeError(f'not an integer: {value}')
    if number < 1:
        raise ap.ArgumentTypeError(f'expected a positive integer, got'
                                   f' {value}')
    return number


def build_parser() -> ap.ArgumentParser:
    parser = ap.ArgumentParser(
        prog='sls4d',
        description='Sparse latent space dynamic novel view synthesis'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    train = commands.add_parser('train', help='train a model')
    train.add_argument('--config', required=True,
                       help='path to a JSON run configuration')
    train.add_argument('--checkpoint', default=None,
                       help='resume from this checkpoint')
    train.add_argument('--out', default=None, help='output directory')
    train.add_argument('--seed', type=int, default=None)
    train.add_argument('--steps', type=positive_int, default=None,
                       help='override the maximum step N_m')

    for name, help_text in (('render', 'render dataset views'),
                            ('eval', 'compute PSNR, SSIM and MS-SSIM'),
                            ('inspect', 'probe the latent space along a'
                                        ' ray')):
        command = commands.add_parser(name, help=help_text)
        command.add_argument('--checkpoint', required=True)
        command.add_argument('--out', default=None,
                             help='output directory')
        command.add_argument('--split', choices=SPLITS, default='test')
        if name != 'eval':
            command.add_argument('--frame', type=int, default=None)
            command.add_argument('--time', type=valid_time, default=None,
                                 help='override the frame time')
        if name == 'inspect':
            command.add_argument('--pixel', type=int, nargs=2, default=None,
                                 metavar=('X', 'Y'))

    synthetic = commands.add_parser('make-synthetic',
                                    help='write a synthetic dataset')
    synthetic.add_argument('--preset', choices=sorted(PRESETS),
                           default='moving-sphere')
    synthetic.add_argument('--out', default=None, help='output directory')
    synthetic.add_argument('--seed', type=int, default=None)
    synthetic.add_argument('--resolution', type=positive_int, default=64)
    synthetic.add_argument('--n-train', type=positive_int, default=20)
    synthetic.add_argument('--n-test', type=int, default=5)

    gradcheck = commands.add_parser('gradcheck',
                                    help='run the gradient check suite')
    gradcheck.add_argument('--seed', type=int, default=None)

    tests = commands.add_parser('test', help='run the unit tests')
    tests.add_argument(
        '-u', '--unit',
        nargs='*',
        type=str,
        help='specify the modules to unit test'
    )

    return parser


def parse_args(argv: list[str] | None=None) -> ap.Namespace:
    return build_parser().parse_args(argv)


def run(argv: list[str] | None=None) -> int:
    """Entry point returning the process exit code."""

    try:
        args = parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else src.EXIT_USAGE
    return src.main(args)


if __name__ == '__main__':
    sys.exit(run())
