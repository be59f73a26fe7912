# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Analytic ellipse phantoms.

Images span [-1, 1] x [-1, 1] with pixel (0, 0) at the top-left corner.
Row i, column j of an N x N image is sampled at its centre

    x = -1 + (j + 0.5) * 2 / N,    y = 1 - (i + 0.5) * 2 / N

so y grows upwards.  The projector uses the same convention.
'''

from collections import namedtuple

import numpy as np

from edgect.lib.errors import InvalidArgumentError

MIN_SIZE = 8


class EllipseSpec(namedtuple('EllipseSpec', 'intensity center_x center_y '
                             'semi_axis_a semi_axis_b rotation_deg')):
    '''One additive ellipse in normalized coordinates.'''
    __slots__ = ()

    def __new__(cls, intensity, center_x, center_y, semi_axis_a, semi_axis_b,
                rotation_deg=0.0):
        if not (semi_axis_a > 0 and semi_axis_b > 0):
            raise InvalidArgumentError('ellipse semi-axes must be positive')
        return super().__new__(cls, float(intensity), float(center_x), float(center_y),
                                float(semi_axis_a), float(semi_axis_b),
                                float(rotation_deg))

    def covers(self, x, y):
        '''Boolean array: which of the points (x, y) lie inside.'''
        theta = np.deg2rad(self.rotation_deg)
        cos, sin = np.cos(theta), np.sin(theta)
        dx, dy = x - self.center_x, y - self.center_y
        u = (dx * cos + dy * sin) / self.semi_axis_a
        v = (-dx * sin + dy * cos) / self.semi_axis_b
        return u * u + v * v <= 1.0


# The modified (high-contrast) Shepp-Logan table.  Interior levels are
# 0.1 to 0.4 after the skull (1.0) and brain (-0.8) ellipses combine.
MODIFIED_SHEPP_LOGAN = (
    EllipseSpec(1.0, 0.0, 0.0, 0.69, 0.92, 0),
    EllipseSpec(-0.8, 0.0, -0.0184, 0.6624, 0.874, 0),
    EllipseSpec(-0.2, 0.22, 0.0, 0.11, 0.31, -18),
    EllipseSpec(-0.2, -0.22, 0.0, 0.16, 0.41, 18),
    EllipseSpec(0.1, 0.0, 0.35, 0.21, 0.25, 0),
    EllipseSpec(0.1, 0.0, 0.1, 0.046, 0.046, 0),
    EllipseSpec(0.1, 0.0, -0.1, 0.046, 0.046, 0),
    EllipseSpec(0.1, -0.08, -0.605, 0.046, 0.023, 0),
    EllipseSpec(0.1, 0.0, -0.606, 0.023, 0.023, 0),
    EllipseSpec(0.1, 0.06, -0.605, 0.023, 0.046, 0),
)


def check_size(size_n):
    if not isinstance(size_n, (int, np.integer)) or size_n < MIN_SIZE:
        raise InvalidArgumentError(f'image size must be an integer >= {MIN_SIZE}, '
                                   f'got {size_n!r}')
    return int(size_n)


def pixel_centers(size_n):
    '''Return (x, y) arrays of pixel-centre coordinates, each size_n x size_n.'''
    step = 2.0 / size_n
    coords = -1.0 + (np.arange(size_n) + 0.5) * step
    return np.meshgrid(coords, -coords, indexing='xy')


def rasterize_ellipses(specs, size_n):
    '''Sum of the intensities of the ellipses covering each pixel centre.

    No clamping is applied, so the result is additive in the spec list.'''
    size_n = check_size(size_n)
    image = np.zeros((size_n, size_n))
    if not specs:
        return image
    x, y = pixel_centers(size_n)
    for spec in specs:
        image[spec.covers(x, y)] += spec.intensity
    return image


def shepp_logan(size_n):
    '''The modified Shepp-Logan phantom, clamped to [0, 1].'''
    return np.clip(rasterize_ellipses(MODIFIED_SHEPP_LOGAN, size_n), 0.0, 1.0)


def disk(size_n, radius, intensity=1.0):
    '''A centred disk of the given normalized radius.'''
    return rasterize_ellipses([EllipseSpec(intensity, 0, 0, radius, radius)], size_n)
