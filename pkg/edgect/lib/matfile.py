# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''MatrixFile codec and grayscale previews.

A MatrixFile is an ASCII header line "CTMAT 1 <rows> <cols>" terminated
by a newline, followed by rows * cols IEEE doubles, little-endian,
row-major.  It is the source of truth for every stored image, sinogram
and mask; previews are lossy conveniences.
'''

import numpy as np
from PIL import Image

from edgect.lib.errors import MatrixFileError

MAGIC = b'CTMAT'
FORMAT_VERSION = 1
LE_DOUBLE = np.dtype('<f8')


def header_bytes(rows, cols):
    return f'CTMAT {FORMAT_VERSION} {rows} {cols}\n'.encode('ascii')


def encode_matrix(matrix):
    '''Return the MatrixFile serialization of a 1-D or 2-D array.

    1-D arrays are stored as a single row.'''
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise MatrixFileError(f'cannot store array of shape {matrix.shape}')
    rows, cols = matrix.shape
    return header_bytes(rows, cols) + matrix.astype(LE_DOUBLE).tobytes(order='C')


def decode_matrix(raw):
    '''Parse MatrixFile bytes and return a (rows, cols) float64 array.'''
    newline = raw.find(b'\n')
    if newline < 0:
        raise MatrixFileError('missing header line')
    parts = raw[:newline].split()
    if len(parts) != 4 or parts[0] != MAGIC:
        raise MatrixFileError(f'bad header {raw[:newline]!r}')
    try:
        version, rows, cols = (int(part) for part in parts[1:])
    except ValueError:
        raise MatrixFileError(f'bad header {raw[:newline]!r}') from None
    if version != FORMAT_VERSION:
        raise MatrixFileError(f'unsupported format version {version}')
    if rows <= 0 or cols <= 0:
        raise MatrixFileError(f'bad dimensions {rows} x {cols}')
    payload = raw[newline + 1:]
    if len(payload) != LE_DOUBLE.itemsize * rows * cols:
        raise MatrixFileError(f'expected {LE_DOUBLE.itemsize * rows * cols:,d} '
                              f'payload bytes, found {len(payload):,d}')
    values = np.frombuffer(payload, dtype=LE_DOUBLE).reshape(rows, cols)
    return values.astype(np.float64)


def write_matrix(path, matrix):
    raw = encode_matrix(matrix)
    with open(path, 'wb') as f:
        f.write(raw)
    return len(raw)


def read_matrix(path):
    with open(path, 'rb') as f:
        raw = f.read()
    try:
        return decode_matrix(raw)
    except MatrixFileError as e:
        raise MatrixFileError(f'{path}: {e}') from None


def preview_pixels(matrix, low=0.0, high=1.0):
    '''Map [low, high] linearly onto 0..255 with clamping.'''
    matrix = np.asarray(matrix, dtype=np.float64)
    scaled = (matrix - low) / (high - low) * 255.0
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def write_preview(path, matrix, low=0.0, high=1.0):
    '''Write an 8-bit grayscale PNG preview of a 2-D array.'''
    Image.fromarray(preview_pixels(matrix, low, high)).save(path, format='PNG')
