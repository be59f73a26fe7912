# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Reconstruction pipelines, reports and parameter sweeps.'''

import asyncio
import csv
import os
from collections import namedtuple

import numpy as np
from aiorpcx import TaskGroup, run_in_thread

from edgect.experiment.env import SWEEP_KEYS
from edgect.lib.errors import InvalidArgumentError
from edgect.lib.matfile import write_matrix, write_preview
from edgect.lib.util import Stopwatch, class_logger
from edgect.recon.fbp import fbp_reconstruct
from edgect.recon.metrics import add_noise, mask_agreement, relative_error
from edgect.recon.phantom import shepp_logan
from edgect.recon.projector import forward, make_geometry
from edgect.recon.solvers import (solve_exact_mask, solve_masked_l2,
                                  solve_tv_split_bregman)
from edgect.recon.sparsity import build_mask, edge_count, true_mask, tv_apply

REPORT_FIELDS = ('method', 'relative_error', 'wall_time_seconds', 'iterations',
                 'objective_value')
MASK_FIELDS = ('mask', 'tau', 'edge_count', 'false_edge_rate', 'missed_edge_rate')
SWEEP_FIELDS = ('parameter', 'value', 'method', 'relative_error', 'wall_time_seconds',
                'iterations', 'objective_value', 'mask_edges')

ReportRow = namedtuple('ReportRow', REPORT_FIELDS)
MaskRow = namedtuple('MaskRow', MASK_FIELDS)
SweepRow = namedtuple('SweepRow', SWEEP_FIELDS)


class ExperimentResult(object):
    '''Everything one run produces, keyed by method or mask name.'''

    def __init__(self, config, phantom, sinogram):
        self.config = config
        self.phantom = phantom
        self.sinogram = sinogram
        self.images = {}
        self.reports = {}
        self.masks = {}
        self.fbp_edges = None
        self.rows = []
        self.mask_rows = []

    def row(self, method):
        return next(row for row in self.rows if row.method == method)


class Experiment(object):
    '''Runs the configured methods on one simulated acquisition.

    For masked_l2 the pipeline is: FBP, edge field D x_fbp, threshold at
    tau, masked l2 solve.  exact_mask uses the mask of the ground truth.
    '''

    def __init__(self, config):
        self.logger = class_logger(__name__, self.__class__.__name__)
        self.config = config

    def simulate(self):
        config = self.config
        phantom = shepp_logan(config.phantom_size)
        geom = make_geometry(config.phantom_size, config.n_angles)
        sinogram = add_noise(forward(phantom, geom), config.noise)
        return phantom, geom, sinogram

    def run(self):
        config = self.config
        methods = config.methods
        self.logger.info(f'N={config.phantom_size} angles={config.n_angles} '
                         f'methods={",".join(methods)} sigma={config.noise.sigma}')
        phantom, geom, sino = self.simulate()
        result = ExperimentResult(config, phantom, sino)

        fbp_image = None
        if {'fbp', 'masked_l2'} & set(methods):
            stopwatch = Stopwatch()
            with stopwatch.timing():
                fbp_image = fbp_reconstruct(sino, geom, config.filter_spec)
            elapsed = stopwatch.elapsed
            misfit = forward(fbp_image, geom).values - sino.values
            result.images['fbp'] = fbp_image
            result.reports['fbp'] = (0, elapsed, float(np.sum(misfit * misfit)))
            self.logger.info(f'FBP done in {elapsed:.2f}s')

        if 'masked_l2' in methods or 'exact_mask' in methods:
            result.masks['true_mask'] = true_mask(phantom)

        if 'masked_l2' in methods:
            result.fbp_edges = tv_apply(fbp_image)
            mask = build_mask(result.fbp_edges, config.tau)
            result.masks['mask'] = mask
            x0 = fbp_image if config.warm_start else None
            image, report = solve_masked_l2(sino, geom, mask, config.masked, x0=x0)
            self._record(result, 'masked_l2', image, report)
            agreement = mask_agreement(mask, result.masks['true_mask'])
            result.mask_rows.append(MaskRow('mask', config.tau, edge_count(mask),
                                            *agreement))
            self.logger.info(f'tau={config.tau}: {edge_count(mask):,d} edges, '
                             f'missed {agreement.missed_edge_rate:.3f}, '
                             f'false {agreement.false_edge_rate:.3f}')

        if 'exact_mask' in methods:
            image, report = solve_exact_mask(sino, geom, result.masks['true_mask'],
                                             config.lambda_large, config.exact)
            self._record(result, 'exact_mask', image, report)

        if 'tv_sb' in methods:
            matched = None
            if 'masked_l2' in result.reports:
                matched = result.reports['masked_l2'][0]
            image, report = solve_tv_split_bregman(sino, geom,
                                                   config.split_bregman(matched))
            self._record(result, 'tv_sb', image, report)

        if 'true_mask' in result.masks:
            truth = result.masks['true_mask']
            result.mask_rows.append(MaskRow('true_mask', 0.0, edge_count(truth), 0.0, 0.0))

        for method in methods:
            iterations, wall_time, objective = result.reports[method]
            error = relative_error(result.images[method], phantom)
            result.rows.append(ReportRow(method, error, wall_time, iterations, objective))
        return result

    def _record(self, result, method, image, report):
        result.images[method] = image
        result.reports[method] = (report.iterations_used, report.wall_time_seconds,
                                  report.objective_value)


def field_as_matrix(field):
    '''Lay out an edge field or mask as a 2N x N matrix: horizontal half
    above vertical half.'''
    field = np.asarray(field, dtype=np.float64)
    size_n = int(round((field.size // 2) ** 0.5))
    return field.reshape(2 * size_n, size_n)


def write_csv(path, fields, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(fields)
        for row in rows:
            writer.writerow(['' if value is None else value for value in row])


def write_result(result, output_dir):
    '''Write MatrixFiles, previews and CSV reports; return the report path.'''
    os.makedirs(output_dir, exist_ok=True)

    def path(name):
        return os.path.join(output_dir, name)

    def image(name, matrix, low=0.0, high=1.0):
        write_matrix(path(name + '.ctmat'), matrix)
        write_preview(path(name + '.png'), matrix, low, high)

    image('phantom', result.phantom)
    sino = result.sinogram.values
    image('sinogram', sino, min(0.0, sino.min()), max(sino.max(), 1e-12))
    for method, matrix in result.images.items():
        image(method, matrix)
    if result.fbp_edges is not None:
        edges = field_as_matrix(result.fbp_edges)
        image('fbp_edges', edges, -1.0, 1.0)
    for name, mask in result.masks.items():
        image(name, field_as_matrix(mask))

    write_csv(path('masks.csv'), MASK_FIELDS, result.mask_rows)
    report_path = path('report.csv')
    write_csv(report_path, REPORT_FIELDS, result.rows)
    return report_path


def override_text(value):
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def sweep_configs(config, parameter, values):
    '''One config per sweep value, validated before anything runs.'''
    key = SWEEP_KEYS.get(parameter)
    if key is None:
        raise InvalidArgumentError('unknown sweep parameter "{}"; choose from {}'
                                   .format(parameter, sorted(SWEEP_KEYS)))
    if not values:
        raise InvalidArgumentError('sweep needs at least one value')
    return [config.with_override(key, override_text(value)) for value in values]


def sweep_rows(parameter, value, result):
    rows = []
    for row in result.rows:
        mask_edges = None
        if row.method == 'masked_l2':
            mask_edges = edge_count(result.masks['mask'])
        elif row.method == 'exact_mask':
            mask_edges = edge_count(result.masks['true_mask'])
        rows.append(SweepRow(parameter, value, row.method, row.relative_error,
                             row.wall_time_seconds, row.iterations,
                             row.objective_value, mask_edges))
    return rows


class Sweep(object):
    '''Runs one experiment per parameter value.

    Points run in worker threads, at most SWEEP_CONCURRENCY at a time;
    rows are returned in sweep order whatever the completion order.
    '''

    def __init__(self, config, parameter, values):
        self.logger = class_logger(__name__, self.__class__.__name__)
        self.parameter = parameter
        self.values = list(values)
        self.configs = sweep_configs(config, parameter, self.values)
        self.concurrency = config.sweep_concurrency
        self.semaphore = None
        self.results = [None] * len(self.configs)

    async def _run_point(self, index):
        async with self.semaphore:
            self.logger.info(f'{self.parameter}={self.values[index]} starting')
            self.results[index] = await run_in_thread(Experiment(self.configs[index]).run)
            self.logger.info(f'{self.parameter}={self.values[index]} done')

    async def run(self):
        self.semaphore = asyncio.Semaphore(self.concurrency)
        async with TaskGroup() as group:
            for index in range(len(self.configs)):
                await group.spawn(self._run_point(index))
            async for task in group:
                if not task.cancelled():
                    task.result()
        rows = []
        for value, result in zip(self.values, self.results):
            rows.extend(sweep_rows(self.parameter, value, result))
        return rows


def run_sweep(config, parameter, values):
    '''Run a sweep to completion and return its rows.'''
    sweep = Sweep(config, parameter, values)
    if config.loop_policy is not None:
        asyncio.set_event_loop_policy(config.loop_policy)
    return asyncio.run(sweep.run())


def write_sweep(rows, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, 'report_sweep.csv')
    write_csv(path, SWEEP_FIELDS, rows)
    return path
