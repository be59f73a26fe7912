# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Command-line driver.

Each subcommand returns an exit code: 0 on success, 1 for bad arguments
or configuration, 2 for a numerical failure and 3 for I/O problems.
'''

import argparse
import logging
import os
import sys

from edgect import version
from edgect.experiment.env import ExperimentConfig
from edgect.experiment.runner import (Experiment, field_as_matrix, run_sweep,
                                      write_result, write_sweep)
from edgect.lib.env_base import EnvBase
from edgect.lib.errors import InvalidArgumentError, MatrixFileError, NumericalFailureError
from edgect.lib.matfile import read_matrix, write_matrix, write_preview
from edgect.lib.text import report_lines, sweep_lines
from edgect.lib.util import CompactFormatter, make_logger, parse_number_list
from edgect.recon.fbp import FilterSpec, fbp_reconstruct
from edgect.recon.metrics import relative_error
from edgect.recon.phantom import shepp_logan
from edgect.recon.projector import Sinogram, forward, make_geometry
from edgect.recon.sparsity import build_mask, edge_count, tv_apply

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def preview_path(path):
    return os.path.splitext(path)[0] + '.png'


def write_with_preview(path, matrix, low=0.0, high=1.0):
    write_matrix(path, matrix)
    write_preview(preview_path(path), matrix, low, high)


def load_config(args):
    overrides = {}
    for item in args.set or ():
        key, sep, value = item.partition('=')
        if not sep:
            raise InvalidArgumentError(f'--set expects KEY=VALUE, got "{item}"')
        overrides[key.strip().upper()] = value.strip()
    if args.output_dir:
        overrides['OUTPUT_DIR'] = args.output_dir
    if args.config:
        return ExperimentConfig.from_file(args.config, overrides)
    return ExperimentConfig(overrides)


def square_size(matrix, path):
    rows, cols = matrix.shape
    if rows != cols:
        raise InvalidArgumentError(f'{path}: expected a square image, got {rows} x {cols}')
    return rows


def cmd_phantom(args):
    image = shepp_logan(args.size)
    write_with_preview(args.output, image)
    print(f'wrote {args.size} x {args.size} phantom to {args.output}')


def cmd_project(args):
    image = read_matrix(args.input)
    geom = make_geometry(square_size(image, args.input), args.angles)
    values = forward(image, geom).values
    write_with_preview(args.output, values, min(0.0, values.min()),
                       max(values.max(), 1e-12))
    print(f'wrote {geom.n_angles} x {geom.n_detectors} sinogram to {args.output}')


def cmd_fbp(args):
    values = read_matrix(args.input)
    geom = make_geometry(args.size, values.shape[0])
    if values.shape != geom.sinogram_shape:
        raise InvalidArgumentError(f'{args.input}: sinogram of shape {values.shape} does '
                                   f'not match image size {args.size}')
    image = fbp_reconstruct(Sinogram(geom, values), geom, FilterSpec(
        padding_factor=args.padding_factor))
    write_with_preview(args.output, image)
    print(f'wrote FBP reconstruction to {args.output}')


def cmd_mask(args):
    image = read_matrix(args.input)
    square_size(image, args.input)
    mask = build_mask(tv_apply(image), args.tau)
    write_with_preview(args.output, field_as_matrix(mask))
    print(f'tau {args.tau:g}: {edge_count(mask):,d} edges, mask written to {args.output}')


def cmd_metrics(args):
    u = read_matrix(args.input)
    x = read_matrix(args.reference)
    print(f'relative_error {relative_error(u, x)!r}')


def cmd_reconstruct(args):
    config = load_config(args)
    setup_logging(config)
    result = Experiment(config).run()
    report_path = write_result(result, config.output_dir)
    for line in report_lines(result.rows):
        print(line)
    print(f'report written to {report_path}')


def cmd_sweep(args):
    config = load_config(args)
    setup_logging(config)
    try:
        values = parse_number_list(args.values)
    except ValueError:
        raise InvalidArgumentError(f'cannot parse sweep values "{args.values}"') from None
    rows = run_sweep(config, args.parameter, values)
    path = write_sweep(rows, config.output_dir)
    for line in sweep_lines(rows):
        print(line)
    print(f'sweep report written to {path}')


def setup_logging(config):
    logger = logging.getLogger('edgect')
    try:
        logger.setLevel(config.log_level)
    except ValueError:
        raise InvalidArgumentError(f'LOG_LEVEL: unknown level {config.log_level}') from None
    for handler in logger.handlers:
        handler.setFormatter(CompactFormatter(config.log_format))


class ArgumentParser(argparse.ArgumentParser):
    '''Reports usage errors as InvalidArgumentError instead of exiting
    with status 2.'''

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidArgumentError(f'{self.prog}: {message}')


def make_parser():
    parser = ArgumentParser(
        'edgect_run',
        description='Edge-masked CT reconstruction experiments'
    )
    parser.add_argument('--version', action='version', version=version)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    def add(name, func, help):
        sub = commands.add_parser(name, help=help)
        sub.set_defaults(func=func)
        return sub

    sub = add('phantom', cmd_phantom, 'write a modified Shepp-Logan phantom')
    sub.add_argument('-n', '--size', type=int, default=256,
                     help='image size in pixels (default: 256)')
    sub.add_argument('output', help='MatrixFile to write; a .png preview is written '
                     'alongside')

    sub = add('project', cmd_project, 'forward-project an image')
    sub.add_argument('-k', '--angles', type=int, default=45,
                     help='number of equally spaced views in [0, pi) (default: 45)')
    sub.add_argument('input', help='image MatrixFile')
    sub.add_argument('output', help='sinogram MatrixFile')

    sub = add('fbp', cmd_fbp, 'filtered back projection of a sinogram')
    sub.add_argument('-n', '--size', type=int, required=True, help='image size')
    sub.add_argument('--padding-factor', type=int, default=2,
                     help='zero padding of the filter FFT (default: 2)')
    sub.add_argument('input', help='sinogram MatrixFile')
    sub.add_argument('output', help='image MatrixFile')

    sub = add('mask', cmd_mask, 'threshold the TV edge field of an image')
    sub.add_argument('-t', '--tau', type=float, default=0.3,
                     help='edge threshold (default: 0.3)')
    sub.add_argument('input', help='image MatrixFile')
    sub.add_argument('output', help='mask MatrixFile, 2N x N')

    sub = add('metrics', cmd_metrics, 'relative error of a reconstruction')
    sub.add_argument('input', help='reconstruction MatrixFile')
    sub.add_argument('reference', help='ground truth MatrixFile')

    for name, func, help in (
            ('reconstruct', cmd_reconstruct, 'run the configured methods'),
            ('sweep', cmd_sweep, 'repeat an experiment over parameter values')):
        sub = add(name, func, help)
        sub.add_argument('-c', '--config', help='flat KEY = value config file')
        sub.add_argument('-s', '--set', action='append', metavar='KEY=VALUE',
                         help='override one config key; may be repeated')
        sub.add_argument('-o', '--output-dir', help='output directory')
        if name == 'sweep':
            sub.add_argument('parameter', help='one of n_angles, tau, lambda_masked, '
                             'lambda_tv, sigma')
            sub.add_argument('values', help='comma-separated values, e.g. 0.1,0.3,0.6')
    return parser


def main(argv=None):
    '''Run a subcommand and return its exit code.'''
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(CompactFormatter('%(levelname)s:%(name)s:%(message)s'))
    logger = make_logger('edgect', handler=handler, level=logging.INFO)
    try:
        args = make_parser().parse_args(argv)
        args.func(args)
        return EXIT_OK
    except (EnvBase.Error, InvalidArgumentError) as e:
        logger.error(f'invalid argument: {e}')
        return EXIT_INVALID
    except NumericalFailureError as e:
        logger.error(f'numerical failure: {e}')
        return EXIT_NUMERICAL
    except (OSError, MatrixFileError) as e:
        logger.error(f'I/O failure: {e}')
        return EXIT_IO
    finally:
        logger.removeHandler(handler)
