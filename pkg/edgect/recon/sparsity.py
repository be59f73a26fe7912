# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Sparsifying transforms and edge masks.

An edge field of an N x N image is a flat vector of length 2 N^2: the
horizontal forward differences u[i, j+1] - u[i, j] row-major, then the
vertical ones u[i+1, j] - u[i, j].  Differences past the last column
(horizontal half) or last row (vertical half) are identically zero.

An edge mask is a 0/1 vector over edge-field positions: 1 where the
masked penalty applies (no edge), 0 at edges.

The sparsity bound K with ||D u||_0 <= K that guarantees uniqueness of
the exact-mask solution is an analysis device only; nothing here
computes or enforces it.
'''

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from edgect.lib import util
from edgect.lib.errors import InvalidArgumentError

TRUE_EDGE_TOLERANCE = 1e-12


def transform_class(name):
    '''Return a sparsifying transform class by case-insensitive name.'''
    for klass in util.subclasses(SparsityTransform):
        if klass.__name__.lower() == name.lower():
            return klass
    raise InvalidArgumentError('unrecognised sparsifying transform "{}"'.format(name))


class SparsityTransform(object):
    '''Abstract base class of linear sparsifying transforms.

    Solvers only use the methods below, so another transform can be
    substituted without touching them.'''

    def apply(self, image):
        raise NotImplementedError

    def adjoint(self, field):
        '''Exact transpose of apply().'''
        raise NotImplementedError

    def field_length(self, size_n):
        raise NotImplementedError

    def seminorm(self, image):
        '''The l1 norm of apply(image).'''
        return float(np.abs(self.apply(image)).sum())

    def linked_regions(self, mask):
        '''Pixel regions over which a mask forces the image constant, as
        (count, labels) with one label per pixel, row-major.  None if the
        transform has no such structure.'''
        return None


class AnisotropicTV(SparsityTransform):
    '''Horizontal and vertical forward differences with a zero last
    column / row.'''

    def apply(self, image):
        image = _square(image)
        size_n = image.shape[0]
        field = np.zeros((2, size_n, size_n))
        field[0, :, :-1] = image[:, 1:] - image[:, :-1]
        field[1, :-1, :] = image[1:, :] - image[:-1, :]
        return field.ravel()

    def adjoint(self, field):
        field = np.asarray(field, dtype=np.float64)
        size_n = _field_size(field)
        horizontal, vertical = field.reshape(2, size_n, size_n)
        image = np.zeros((size_n, size_n))
        image[:, :-1] -= horizontal[:, :-1]
        image[:, 1:] += horizontal[:, :-1]
        image[:-1, :] -= vertical[:-1, :]
        image[1:, :] += vertical[:-1, :]
        return image

    def field_length(self, size_n):
        return 2 * size_n * size_n

    def linked_regions(self, mask):
        '''Connected components of the pixel grid, two neighbours being
        linked when the mask keeps (is 1 at) their difference.'''
        mask = np.asarray(mask)
        size_n = _field_size(mask)
        horizontal, vertical = mask.reshape(2, size_n, size_n)
        index = np.arange(size_n * size_n).reshape(size_n, size_n)
        across = horizontal[:, :-1] == 1
        down = vertical[:-1, :] == 1
        rows = np.concatenate((index[:, :-1][across], index[:-1, :][down]))
        cols = np.concatenate((index[:, 1:][across], index[1:, :][down]))
        graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(index.size, index.size))
        return connected_components(graph, directed=False)


def _square(image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise InvalidArgumentError(f'expected a square image, got shape {image.shape}')
    return image


def _field_size(field):
    if field.ndim != 1 or field.size % 2:
        raise InvalidArgumentError('edge field must be a flat vector of even length')
    size_n = int(round((field.size // 2) ** 0.5))
    if 2 * size_n * size_n != field.size:
        raise InvalidArgumentError(f'edge field length {field.size} is not 2 N^2')
    return size_n


TV = AnisotropicTV()


def tv_apply(image):
    return TV.apply(image)


def tv_adjoint(field):
    return TV.adjoint(field)


def tv_seminorm(image):
    return TV.seminorm(image)


def build_mask(field, tau):
    '''Threshold an approximate edge field: 1 where |y| < tau, else 0.'''
    if not tau > 0:
        raise InvalidArgumentError(f'tau must be positive, got {tau!r}')
    field = np.asarray(field, dtype=np.float64)
    _field_size(field)
    return (np.abs(field) < tau).astype(np.uint8)


def true_mask(image, transform=TV):
    '''The exact mask of a noiseless ground truth: 1 where its transform
    vanishes.'''
    field = transform.apply(image)
    return (np.abs(field) <= TRUE_EDGE_TOLERANCE).astype(np.uint8)


def check_mask(mask, size_n, transform=TV):
    mask = np.asarray(mask)
    if mask.shape != (transform.field_length(size_n), ):
        raise InvalidArgumentError(f'mask of shape {mask.shape} does not match '
                                   f'image size {size_n}')
    if not np.all((mask == 0) | (mask == 1)):
        raise InvalidArgumentError('mask entries must be 0 or 1')
    return mask.astype(np.float64)


def edge_count(mask):
    '''Size of the zero-set of a mask.'''
    return int(np.count_nonzero(np.asarray(mask) == 0))
