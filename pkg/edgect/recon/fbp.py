# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Filtered back projection with the Ram-Lak filter.'''

import math
import threading
from collections import namedtuple

import numpy as np
import pylru
from scipy import fft

from edgect.lib.errors import InvalidArgumentError
from edgect.recon.projector import Sinogram

FILTER_KINDS = ('ram_lak', )


class FilterSpec(namedtuple('FilterSpec', 'kind padding_factor')):
    '''FBP filter choice.  Rows are zero-padded to the next power of two
    at least padding_factor times the detector count.'''
    __slots__ = ()

    def __new__(cls, kind='ram_lak', padding_factor=2):
        if kind not in FILTER_KINDS:
            raise InvalidArgumentError(f'unknown filter kind "{kind}"')
        if not isinstance(padding_factor, (int, np.integer)) or padding_factor < 2:
            raise InvalidArgumentError('padding_factor must be an integer >= 2')
        return super().__new__(cls, kind, int(padding_factor))

    def padded_length(self, n_detectors):
        return 1 << math.ceil(math.log2(self.padding_factor * n_detectors))


def ramp_kernel(length, spacing=1.0):
    '''The band-limited Ram-Lak kernel sampled at lags 0..length-1 in FFT
    (wrap-around) order:  h(0) = 1/4, h(k) = -1/(pi k)^2 for odd k, zero
    for even k != 0, divided by the detector spacing.'''
    lags = np.arange(length)
    lags = np.where(lags <= length // 2, lags, lags - length)
    kernel = np.zeros(length)
    kernel[0] = 0.25
    odd = lags % 2 == 1
    kernel[odd] = -1.0 / (math.pi * lags[odd]) ** 2
    return kernel / spacing


_response_cache = pylru.lrucache(32)
_response_lock = threading.Lock()


def ramp_response(length, spacing=1.0):
    '''Real frequency response of ramp_kernel, as used by rfft.'''
    key = (length, spacing)
    with _response_lock:
        response = _response_cache.get(key)
    if response is None:
        response = fft.rfft(ramp_kernel(length, spacing)).real
        with _response_lock:
            _response_cache[key] = response
    return response


def filter_sinogram(sino, spec=FilterSpec()):
    '''Convolve each angle row with the Ram-Lak kernel, by FFT.'''
    n_detectors = sino.geometry.n_detectors
    length = spec.padded_length(n_detectors)
    response = ramp_response(length, sino.geometry.detector_spacing)
    spectrum = fft.rfft(sino.values, n=length, axis=1)
    filtered = fft.irfft(spectrum * response, n=length, axis=1)[:, :n_detectors]
    return sino.with_values(filtered)


def backproject(sino, geom):
    '''Pixel-driven backprojection with linear interpolation along the
    detector row, scaled by pi / n_angles.  Pixels outside the inscribed
    circle are kept.'''
    if sino.geometry != geom:
        raise InvalidArgumentError('sinogram geometry does not match')
    size_n = geom.size_n
    n_detectors = geom.n_detectors
    xc = geom.pixel_offsets[None, :]
    yc = -geom.pixel_offsets[:, None]
    center = (n_detectors - 1) / 2
    image = np.zeros((size_n, size_n))
    for row, angle in enumerate(geom.angles_rad):
        projection = np.pad(sino.values[row], 1)
        position = (xc * math.cos(angle) + yc * math.sin(angle)) / geom.detector_spacing
        position += center
        lo = np.floor(position)
        frac = position - lo
        lo = lo.astype(np.intp)
        k0 = np.clip(lo, -1, n_detectors) + 1
        k1 = np.clip(lo + 1, -1, n_detectors) + 1
        image += (1.0 - frac) * projection[k0] + frac * projection[k1]
    return image * (math.pi / geom.n_angles)


def fbp_reconstruct(sino, geom, spec=FilterSpec()):
    '''Filtered back projection: backproject(filter_sinogram(sino)).'''
    if sino.geometry != geom:
        raise InvalidArgumentError('sinogram geometry does not match')
    return backproject(filter_sinogram(sino, spec), geom)
