# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Matrix-free parallel-beam Radon transform and its exact adjoint.

Geometry, in pixel units with the origin at the image centre: the pixel
in row i, column j has centre

    xc = j - (N - 1) / 2,    yc = (N - 1) / 2 - i

and the ray for angle theta and detector offset t is the line
xc * cos(theta) + yc * sin(theta) = t.  Detector k sits at
t_k = (k - (n_detectors - 1) / 2) * detector_spacing.

The forward projector is ray driven with Joseph interpolation: a ray
that is closer to vertical visits every image row once (closer to
horizontal, every column), interpolates linearly between the two pixels
straddling the crossing point and weights the sample by the path length
per row (or column).  Pixels outside the image count as zero.  The
adjoint gathers exactly the weights the forward projector deposits.
'''

import math
from collections import namedtuple

import numpy as np

from edgect.lib.errors import InvalidArgumentError
from edgect.lib.util import cachedproperty
from edgect.recon.phantom import check_size

MAX_DENSE_SIZE = 16


class ProjectionGeometry(namedtuple('ProjectionGeometry', 'size_n angles_rad '
                                    'n_detectors detector_spacing')):
    '''Parallel-beam acquisition: image side, angles, detector row.'''

    def __new__(cls, size_n, angles_rad, n_detectors, detector_spacing=1.0):
        size_n = check_size(size_n)
        angles = tuple(float(angle) for angle in angles_rad)
        if not angles:
            raise InvalidArgumentError('at least one projection angle is required')
        if any(not 0 <= angle < math.pi for angle in angles):
            raise InvalidArgumentError('projection angles must lie in [0, pi)')
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise InvalidArgumentError('projection angles must be strictly increasing')
        if n_detectors < 1:
            raise InvalidArgumentError('n_detectors must be positive')
        if not detector_spacing > 0:
            raise InvalidArgumentError('detector_spacing must be positive')
        return super().__new__(cls, size_n, angles, int(n_detectors),
                               float(detector_spacing))

    @property
    def n_angles(self):
        return len(self.angles_rad)

    @property
    def sinogram_shape(self):
        return (self.n_angles, self.n_detectors)

    @cachedproperty
    def detector_offsets(self):
        center = (self.n_detectors - 1) / 2
        return (np.arange(self.n_detectors) - center) * self.detector_spacing

    @cachedproperty
    def pixel_offsets(self):
        '''Pixel-centre coordinates along one axis, left to right.'''
        return np.arange(self.size_n) - (self.size_n - 1) / 2


class Sinogram(namedtuple('Sinogram', 'geometry values')):
    '''Line integrals, one row per angle and one column per detector.'''
    __slots__ = ()

    def __new__(cls, geometry, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != geometry.sinogram_shape:
            raise InvalidArgumentError(f'sinogram shape {values.shape} does not match '
                                       f'geometry {geometry.sinogram_shape}')
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError('sinogram contains non-finite values')
        return super().__new__(cls, geometry, values)

    def with_values(self, values):
        return Sinogram(self.geometry, values)


def make_geometry(size_n, n_angles):
    '''Equally spaced angles k * pi / n_angles and a detector row covering
    the image diagonal: the smallest odd count >= size_n * sqrt(2), spaced
    one pixel apart so that one detector is centred on the origin.'''
    size_n = check_size(size_n)
    if not isinstance(n_angles, (int, np.integer)) or n_angles < 1:
        raise InvalidArgumentError(f'n_angles must be a positive integer, got {n_angles!r}')
    n_detectors = math.ceil(size_n * math.sqrt(2))
    if n_detectors % 2 == 0:
        n_detectors += 1
    angles = [k * math.pi / n_angles for k in range(n_angles)]
    return ProjectionGeometry(size_n, angles, n_detectors, 1.0)


def _ray_tables(geom, angle):
    '''Interpolation tables for one angle.

    Returns flat indices into the zero-padded (N + 2) x (N + 2) image and
    matching weights, each of shape (n_detectors, N): sample m of ray k
    reads w0 * padded[idx0] + w1 * padded[idx1].
    '''
    size_n = geom.size_n
    padded = size_n + 2
    cos, sin = math.cos(angle), math.sin(angle)
    t = geom.detector_offsets[:, None]
    offsets = geom.pixel_offsets[None, :]
    half = (size_n - 1) / 2

    if abs(cos) >= abs(sin):
        # One sample per row; interpolate across columns
        rows = np.arange(size_n)[None, :]
        yc = -offsets
        cols_f = (t - yc * sin) / cos + half
        lo = np.floor(cols_f)
        frac = cols_f - lo
        lo = lo.astype(np.intp)
        c0 = np.clip(lo, -1, size_n) + 1
        c1 = np.clip(lo + 1, -1, size_n) + 1
        idx0 = (rows + 1) * padded + c0
        idx1 = (rows + 1) * padded + c1
        step = 1.0 / abs(cos)
    else:
        # One sample per column; interpolate across rows
        cols = np.arange(size_n)[None, :]
        rows_f = half - (t - offsets * cos) / sin
        lo = np.floor(rows_f)
        frac = rows_f - lo
        lo = lo.astype(np.intp)
        r0 = np.clip(lo, -1, size_n) + 1
        r1 = np.clip(lo + 1, -1, size_n) + 1
        idx0 = r0 * padded + cols + 1
        idx1 = r1 * padded + cols + 1
        step = 1.0 / abs(sin)

    w1 = frac * step
    w0 = step - w1
    return idx0.astype(np.int32), idx1.astype(np.int32), w0, w1


def _check_image(image, geom):
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (geom.size_n, geom.size_n):
        raise InvalidArgumentError(f'image shape {image.shape} does not match '
                                   f'geometry size {geom.size_n}')
    return image


def forward(image, geom):
    '''Return the Sinogram of an image: the discrete Radon transform R.'''
    return Sinogram(geom, forward_values(_check_image(image, geom), geom))


def forward_values(image, geom):
    '''Unchecked forward projection of an N x N array; returns the raw
    (n_angles, n_detectors) array.'''
    tables = (_ray_tables(geom, angle) for angle in geom.angles_rad)
    return _forward(image, geom, tables)


def adjoint(sino, geom):
    '''Return R^T applied to a sinogram.  This is the exact transpose of
    forward(), not a filtered backprojection.'''
    if sino.geometry != geom:
        raise InvalidArgumentError('sinogram geometry does not match')
    return adjoint_values(sino.values, geom)


def adjoint_values(values, geom):
    '''Unchecked adjoint of a raw (n_angles, n_detectors) array.'''
    tables = (_ray_tables(geom, angle) for angle in geom.angles_rad)
    return _adjoint(values, geom, tables)


def _forward(image, geom, tables):
    flat = np.pad(image, 1).ravel()
    values = np.empty(geom.sinogram_shape)
    for row, (idx0, idx1, w0, w1) in enumerate(tables):
        values[row] = (w0 * flat[idx0] + w1 * flat[idx1]).sum(axis=1)
    return values


def _adjoint(values, geom, tables):
    padded = geom.size_n + 2
    accum = np.zeros(padded * padded)
    for row, (idx0, idx1, w0, w1) in enumerate(tables):
        v = values[row][:, None]
        # bincount sums in input order, so results are reproducible
        accum += np.bincount(idx0.ravel(), weights=(w0 * v).ravel(),
                             minlength=padded * padded)
        accum += np.bincount(idx1.ravel(), weights=(w1 * v).ravel(),
                             minlength=padded * padded)
    return accum.reshape(padded, padded)[1:-1, 1:-1].copy()


class RayTables(object):
    '''The interpolation tables of every angle of one geometry, built once.

    For operators applied many times on the same geometry, as inside the
    iterative solvers.  Takes about 24 bytes per ray sample, i.e.
    n_angles * n_detectors * size_n * 24 bytes.  Results are bit-identical
    to forward_values() and adjoint_values().
    '''

    def __init__(self, geom):
        self.geom = geom
        self.tables = [_ray_tables(geom, angle) for angle in geom.angles_rad]

    def forward(self, image):
        return _forward(image, self.geom, self.tables)

    def adjoint(self, values):
        return _adjoint(values, self.geom, self.tables)


def materialize_dense(geom):
    '''The dense system matrix, column j being forward() of the j-th unit
    image.  Only for small test geometries.'''
    if geom.size_n > MAX_DENSE_SIZE:
        raise InvalidArgumentError(f'refusing to materialize a {geom.size_n}-pixel '
                                   f'geometry; the limit is {MAX_DENSE_SIZE}')
    n_pixels = geom.size_n ** 2
    matrix = np.empty((geom.n_angles * geom.n_detectors, n_pixels))
    basis = np.zeros(n_pixels)
    for j in range(n_pixels):
        basis[j] = 1.0
        matrix[:, j] = forward(basis.reshape(geom.size_n, geom.size_n), geom).values.ravel()
        basis[j] = 0.0
    return matrix
