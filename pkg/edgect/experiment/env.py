# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Experiment configuration and presets.'''

from edgect.lib.env_base import EnvBase, read_config_file
from edgect.lib.errors import InvalidArgumentError
from edgect.recon.fbp import FilterSpec
from edgect.recon.metrics import NoiseSpec
from edgect.recon.phantom import check_size
from edgect.recon.solvers import (EXACT_MASK_CG, DEFAULT_LAMBDA_LARGE, MaskedL2Config,
                                  SplitBregmanConfig)

METHODS = ('fbp', 'tv_sb', 'masked_l2', 'exact_mask')

# Resolutions and iteration budgets are choices, not published values.
PRESETS = {
    'fig3': {
        'PHANTOM_SIZE': '256',
        'N_ANGLES': '45',
        'METHODS': 'fbp,tv_sb,masked_l2',
        'TAU': '0.3',
        'LAMBDA_MASKED': '0.1',
        'LAMBDA_TV': '0.01',
        'SB_INNER_CG_ITERS': 'match',
    },
    'fig1': {
        'PHANTOM_SIZE': '256',
        'N_ANGLES': '1',
        'METHODS': 'fbp,tv_sb,exact_mask',
        'LAMBDA_TV': '0.01',
    },
}

KNOWN_KEYS = {
    'PRESET', 'PHANTOM_SIZE', 'N_ANGLES', 'METHODS', 'TAU', 'LAMBDA_MASKED',
    'LAMBDA_TV', 'LAMBDA_LARGE', 'SIGMA', 'SEED', 'NOISE_SEED', 'OUTPUT_DIR',
    'MAX_ITERS', 'REL_TOLERANCE', 'EXACT_MAX_ITERS', 'EXACT_REL_TOLERANCE',
    'SB_MU', 'SB_OUTER_ITERS', 'SB_INNER_CG_ITERS', 'PADDING_FACTOR',
    'WARM_START', 'SWEEP_CONCURRENCY', 'LOG_LEVEL', 'LOG_FORMAT',
    'EVENT_LOOP_POLICY',
}

SWEEP_KEYS = {
    'n_angles': 'N_ANGLES',
    'tau': 'TAU',
    'lambda_masked': 'LAMBDA_MASKED',
    'lambda_tv': 'LAMBDA_TV',
    'sigma': 'SIGMA',
}

MATCH = 'match'


def parse_methods(text):
    methods = tuple(part.strip().lower() for part in text.split(',') if part.strip())
    unknown = [method for method in methods if method not in METHODS]
    if unknown:
        raise ValueError(f'unknown methods {unknown}')
    if not methods:
        raise ValueError('no methods given')
    return methods


class ExperimentConfig(EnvBase):
    '''Settings of one reconstruction experiment.

    Values come from the config mapping, then the environment, then the
    named preset, then built-in defaults.  Every invalid field is
    reported, not just the first.
    '''

    def __init__(self, values=None):
        values = {key.upper(): value for key, value in (values or {}).items()}
        unknown = sorted(set(values) - KNOWN_KEYS)
        if unknown:
            raise self.Error('unknown configuration keys {}'.format(unknown))
        super().__init__(values)
        self.problems = []

        self.preset = self.default('PRESET', 'fig3').strip().lower()
        if self.preset not in PRESETS:
            raise self.Error('unknown preset "{}"; choose from {}'
                             .format(self.preset, sorted(PRESETS)))
        self.preset_values = PRESETS[self.preset]

        # Problem

        self.phantom_size = self.field(self.integer, 'PHANTOM_SIZE', 256, check_size)
        self.n_angles = self.field(self.integer, 'N_ANGLES', 45, _positive)
        self.methods = self.field(self.custom_parse(parse_methods), 'METHODS',
                                  ('fbp', 'tv_sb', 'masked_l2'))
        self.seed = self.field(self.integer, 'SEED', 0, _unsigned)
        sigma = self.field(self.floating, 'SIGMA', 0.0, _non_negative)
        noise_seed = self.field(self.integer, 'NOISE_SEED', self.seed, _unsigned)
        self.noise = self.build('SIGMA/NOISE_SEED', NoiseSpec, sigma, noise_seed)
        self.output_dir = self.default('OUTPUT_DIR', 'edgect-output')

        # Method parameters

        self.tau = self.field(self.floating, 'TAU', 0.3, _positive)
        self.lambda_masked = self.field(self.floating, 'LAMBDA_MASKED', 0.1, _positive)
        self.lambda_tv = self.field(self.floating, 'LAMBDA_TV', 0.01, _positive)
        self.lambda_large = self.field(self.floating, 'LAMBDA_LARGE',
                                       DEFAULT_LAMBDA_LARGE, _positive)
        max_iters = self.field(self.integer, 'MAX_ITERS', 500)
        rel_tolerance = self.field(self.floating, 'REL_TOLERANCE', 1e-8)
        self.masked = self.build('LAMBDA_MASKED/MAX_ITERS/REL_TOLERANCE', MaskedL2Config,
                                 self.lambda_masked, max_iters, rel_tolerance)
        exact_iters = self.field(self.integer, 'EXACT_MAX_ITERS', EXACT_MASK_CG.max_iters)
        exact_tolerance = self.field(self.floating, 'EXACT_REL_TOLERANCE',
                                     EXACT_MASK_CG.rel_tolerance)
        self.exact = self.build('EXACT_MAX_ITERS/EXACT_REL_TOLERANCE', MaskedL2Config,
                                1.0, exact_iters, exact_tolerance)
        self.sb_mu = self.field(self.floating, 'SB_MU', 1.0, _positive)
        self.sb_outer_iters = self.field(self.integer, 'SB_OUTER_ITERS', 10, _positive)
        self.sb_inner_cg_iters = self.field(self.custom_parse(_inner_iters),
                                            'SB_INNER_CG_ITERS', 10)
        self.filter_spec = self.build('PADDING_FACTOR', FilterSpec, 'ram_lak',
                                      self.field(self.integer, 'PADDING_FACTOR', 2))
        self.warm_start = self.boolean('WARM_START', False)
        self.sweep_concurrency = self.field(self.integer, 'SWEEP_CONCURRENCY', 1, _positive)

        # Logging

        self.log_level = self.default('LOG_LEVEL', 'info').upper()
        self.log_format = self.default('LOG_FORMAT', '%(levelname)s:%(name)s:%(message)s')

        if self.problems:
            raise self.Error('invalid configuration:\n  ' + '\n  '.join(self.problems))

    @classmethod
    def from_file(cls, path, overrides=None):
        '''Build a config from a file; OSError propagates.'''
        values = read_config_file(path)
        values.update(overrides or {})
        return cls(values)

    def lookup(self, key):
        value = super().lookup(key)
        if value is None:
            value = getattr(self, 'preset_values', {}).get(key)
        return value

    def custom_parse(self, parse):
        def accessor(key, default):
            return self.custom(key, default, parse)
        return accessor

    def field(self, accessor, key, default, check=None):
        '''Read one field, recording rather than raising any problem.'''
        try:
            value = accessor(key, default)
            if check is not None:
                value = check(value)
            return value
        except (self.Error, InvalidArgumentError, ValueError) as e:
            self.problems.append(f'{key}: {e}')
            return default

    def build(self, keys, factory, *args):
        try:
            return factory(*args)
        except InvalidArgumentError as e:
            self.problems.append(f'{keys}: {e}')
            return None

    def with_override(self, key, value):
        '''A copy of this config with one key replaced.'''
        values = dict(self.values)
        values['PRESET'] = self.preset
        values[key] = str(value)
        return self.__class__(values)

    def split_bregman(self, matched_iters=None):
        inner = self.sb_inner_cg_iters
        if inner == MATCH:
            inner = matched_iters or 10
        return SplitBregmanConfig(self.lambda_tv, self.sb_mu, self.sb_outer_iters, inner)


def _positive(value):
    if not value > 0:
        raise ValueError(f'must be positive, got {value}')
    return value


def _non_negative(value):
    if not value >= 0:
        raise ValueError(f'must be non-negative, got {value}')
    return value


def _unsigned(value):
    if not 0 <= value < 1 << 64:
        raise ValueError(f'must be an unsigned 64-bit integer, got {value}')
    return value


def _inner_iters(text):
    text = text.strip().lower()
    if text == MATCH:
        return MATCH
    return _positive(int(text))
