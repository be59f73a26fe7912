# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Error metrics, sinogram noise and mask statistics.

Noise comes from numpy's PCG64 bit generator seeded with the NoiseSpec
seed, so a (seed, sigma, sinogram) triple always yields the same output.
'''

from collections import namedtuple

import numpy as np

from edgect.lib.errors import InvalidArgumentError

MaskAgreement = namedtuple('MaskAgreement', 'false_edge_rate missed_edge_rate')


class NoiseSpec(namedtuple('NoiseSpec', 'sigma seed')):
    '''Additive Gaussian sinogram noise.'''
    __slots__ = ()

    def __new__(cls, sigma=0.0, seed=0):
        if not sigma >= 0:
            raise InvalidArgumentError(f'noise sigma must be non-negative, got {sigma!r}')
        if not 0 <= seed < 1 << 64:
            raise InvalidArgumentError('noise seed must be an unsigned 64-bit integer')
        return super().__new__(cls, float(sigma), int(seed))


def relative_error(u, x):
    '''||u - x|| / ||x||.'''
    u = np.asarray(u, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if u.shape != x.shape:
        raise InvalidArgumentError(f'shapes {u.shape} and {x.shape} differ')
    reference = np.linalg.norm(x)
    if reference == 0:
        raise InvalidArgumentError('relative error against a zero reference image')
    return float(np.linalg.norm(u - x) / reference)


def add_noise(sino, spec):
    '''Return sino plus i.i.d. N(0, sigma^2) samples.  sigma = 0 returns
    the input unchanged.'''
    if spec.sigma == 0:
        return sino
    generator = np.random.Generator(np.random.PCG64(spec.seed))
    noise = generator.normal(0.0, spec.sigma, size=sino.values.shape)
    return sino.with_values(sino.values + noise)


def mask_agreement(approx, truth):
    '''Compare an approximate edge mask with the true one.

    missed_edge_rate: fraction of true edges (truth == 0) the approximation
    marks as non-edges.  false_edge_rate: fraction of true non-edges
    (truth == 1) it marks as edges.  An empty class gives rate 0.
    '''
    approx = np.asarray(approx)
    truth = np.asarray(truth)
    if approx.shape != truth.shape:
        raise InvalidArgumentError(f'mask shapes {approx.shape} and {truth.shape} differ')
    edges = truth == 0
    n_edges = int(np.count_nonzero(edges))
    n_flat = truth.size - n_edges
    missed = np.count_nonzero(edges & (approx == 1))
    false = np.count_nonzero(~edges & (approx == 0))
    return MaskAgreement(false / n_flat if n_flat else 0.0,
                         missed / n_edges if n_edges else 0.0)
