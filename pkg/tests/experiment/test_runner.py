# Tests of experiment/runner.py.  The fig3 fixture is the most expensive
# run of the suite and is shared by every test that needs it.

import csv
import os

import numpy as np
import pytest

from edgect.experiment.env import ExperimentConfig
from edgect.experiment.runner import (Experiment, REPORT_FIELDS, SWEEP_FIELDS,
                                      field_as_matrix, run_sweep, sweep_configs,
                                      write_result, write_sweep)
from edgect.lib.errors import InvalidArgumentError
from edgect.lib.matfile import read_matrix
from edgect.recon.metrics import relative_error
from edgect.recon.sparsity import tv_apply

SMALL = {
    'PHANTOM_SIZE': '32',
    'N_ANGLES': '8',
    'METHODS': 'fbp,masked_l2,tv_sb,exact_mask',
    'MAX_ITERS': '40',
    'EXACT_MAX_ITERS': '60',
    'SB_OUTER_ITERS': '3',
}


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


@pytest.fixture(scope='module')
def fig3(tmpdir_factory):
    out = str(tmpdir_factory.mktemp('fig3'))
    result = Experiment(ExperimentConfig({'PRESET': 'fig3'})).run()
    write_result(result, out)
    return result, out


@pytest.fixture(scope='module')
def fig1():
    return Experiment(ExperimentConfig({'PRESET': 'fig1'})).run()


def test_fig3_error_ordering(fig3):
    result, _ = fig3
    errors = {row.method: row.relative_error for row in result.rows}
    assert errors['masked_l2'] < errors['tv_sb'] < errors['fbp']
    assert errors['masked_l2'] <= 0.15
    assert 0.25 <= errors['fbp'] <= 0.5


def test_fig3_speed(fig3):
    result, _ = fig3
    masked = result.row('masked_l2')
    tv = result.row('tv_sb')
    assert tv.iterations <= 10 * masked.iterations
    assert tv.wall_time_seconds >= 5 * masked.wall_time_seconds


def test_fig3_report(fig3):
    result, out = fig3
    rows = read_csv(os.path.join(out, 'report.csv'))
    assert [row['method'] for row in rows] == ['fbp', 'tv_sb', 'masked_l2']
    assert list(rows[0]) == list(REPORT_FIELDS)
    assert rows[0]['iterations'] == '0'
    phantom = read_matrix(os.path.join(out, 'phantom.ctmat'))
    for row in rows:
        image = read_matrix(os.path.join(out, row['method'] + '.ctmat'))
        assert float(row['relative_error']) == relative_error(image, phantom)


def test_fig3_outputs(fig3):
    _, out = fig3
    for name in ('phantom', 'sinogram', 'fbp', 'tv_sb', 'masked_l2', 'fbp_edges',
                 'mask', 'true_mask'):
        assert os.path.exists(os.path.join(out, name + '.ctmat'))
        assert os.path.exists(os.path.join(out, name + '.png'))
    assert read_matrix(os.path.join(out, 'sinogram.ctmat')).shape == (45, 363)
    assert read_matrix(os.path.join(out, 'mask.ctmat')).shape == (512, 256)
    masks = read_csv(os.path.join(out, 'masks.csv'))
    assert [row['mask'] for row in masks] == ['mask', 'true_mask']
    assert float(masks[0]['tau']) == 0.3
    assert float(masks[1]['missed_edge_rate']) == 0


def test_fig3_mask_finds_skull(fig3):
    result, _ = fig3
    skull = np.abs(tv_apply(result.phantom)) > 0.99
    assert np.count_nonzero(skull) > 0
    found = result.masks['mask'][skull] == 0
    assert np.count_nonzero(found) >= 0.9 * np.count_nonzero(skull)


def test_fig1_exact_mask(fig1):
    assert fig1.config.n_angles == 1
    assert fig1.config.phantom_size == 256
    assert fig1.row('exact_mask').relative_error <= 0.05
    u = fig1.images['exact_mask']
    field = tv_apply(u)
    masked = fig1.masks['true_mask'] * field
    assert masked @ masked <= 1e-6 * (field @ field)
    assert fig1.row('exact_mask').relative_error < fig1.row('fbp').relative_error


def test_methods_order_follows_config():
    config = ExperimentConfig(dict(SMALL, METHODS='exact_mask,fbp'))
    result = Experiment(config).run()
    assert [row.method for row in result.rows] == ['exact_mask', 'fbp']
    assert 'mask' not in result.masks
    assert [row.mask for row in result.mask_rows] == ['true_mask']


def test_fbp_only():
    result = Experiment(ExperimentConfig(dict(SMALL, METHODS='fbp'))).run()
    row, = result.rows
    assert row.iterations == 0
    assert row.objective_value > 0
    assert result.masks == {}


def test_warm_start_runs():
    config = ExperimentConfig(dict(SMALL, METHODS='masked_l2', WARM_START='yes'))
    result = Experiment(config).run()
    assert result.row('masked_l2').relative_error < 1


def test_noise_changes_result():
    clean = Experiment(ExperimentConfig(dict(SMALL, METHODS='fbp'))).run()
    noisy = Experiment(ExperimentConfig(dict(SMALL, METHODS='fbp', SIGMA='0.5'))).run()
    assert not np.array_equal(clean.sinogram.values, noisy.sinogram.values)
    assert noisy.rows[0].relative_error > clean.rows[0].relative_error


def test_deterministic(tmpdir):
    config = ExperimentConfig(dict(SMALL, SIGMA='0.05', SEED='3'))
    outs = []
    for name in ('first', 'second'):
        out = os.path.join(tmpdir, name)
        write_result(Experiment(config).run(), out)
        outs.append(out)
    names = sorted(name for name in os.listdir(outs[0]) if name.endswith('.ctmat'))
    assert len(names) == 9
    for name in names:
        with open(os.path.join(outs[0], name), 'rb') as f1, \
                open(os.path.join(outs[1], name), 'rb') as f2:
            assert f1.read() == f2.read()
    first, second = (read_csv(os.path.join(out, 'report.csv')) for out in outs)
    for a, b in zip(first, second):
        for key in ('method', 'relative_error', 'iterations', 'objective_value'):
            assert a[key] == b[key]


def test_field_as_matrix():
    field = np.arange(2 * 16.0)
    matrix = field_as_matrix(field)
    assert matrix.shape == (8, 4)
    assert matrix[4, 0] == 16


def test_sweep_n_angles_fbp():
    config = ExperimentConfig({'METHODS': 'fbp'})
    rows = run_sweep(config, 'n_angles', [15, 45, 90, 180])
    assert [row.value for row in rows] == [15, 45, 90, 180]
    errors = [row.relative_error for row in rows]
    assert all(a > b for a, b in zip(errors, errors[1:]))
    assert all(row.mask_edges is None for row in rows)


def test_sweep_tau(tmpdir):
    config = ExperimentConfig(dict(SMALL, METHODS='masked_l2', SWEEP_CONCURRENCY='2'))
    rows = run_sweep(config, 'tau', [0.1, 0.3, 0.6])
    assert [row.value for row in rows] == [0.1, 0.3, 0.6]
    assert [row.method for row in rows] == ['masked_l2'] * 3
    edges = [row.mask_edges for row in rows]
    assert edges[0] >= edges[1] >= edges[2]
    path = write_sweep(rows, str(tmpdir))
    lines = read_csv(path)
    assert list(lines[0]) == list(SWEEP_FIELDS)
    assert [float(line['value']) for line in lines] == [0.1, 0.3, 0.6]


def test_sweep_rows_per_method():
    config = ExperimentConfig(dict(SMALL, METHODS='fbp,exact_mask'))
    rows = run_sweep(config, 'sigma', [0, 0.1])
    assert [(row.value, row.method) for row in rows] == [
        (0, 'fbp'), (0, 'exact_mask'), (0.1, 'fbp'), (0.1, 'exact_mask')]
    assert rows[1].mask_edges == rows[3].mask_edges > 0


def test_sweep_errors():
    config = ExperimentConfig(SMALL)
    with pytest.raises(InvalidArgumentError):
        run_sweep(config, 'mu', [1.0])
    with pytest.raises(InvalidArgumentError):
        run_sweep(config, 'tau', [])


def test_sweep_configs():
    configs = sweep_configs(ExperimentConfig(SMALL), 'lambda_masked', [0.05, 2])
    assert [config.lambda_masked for config in configs] == [0.05, 2.0]
    assert all(config.phantom_size == 32 for config in configs)
