import os

import numpy as np
import pytest
from PIL import Image

from edgect.lib.errors import MatrixFileError
from edgect.lib.matfile import (decode_matrix, encode_matrix, preview_pixels,
                                read_matrix, write_matrix, write_preview)


def test_encode_layout():
    m = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    raw = encode_matrix(m)
    header = b'CTMAT 1 2 3\n'
    assert raw.startswith(header)
    assert len(raw) == len(header) + 8 * 6
    # row-major little-endian doubles
    assert np.frombuffer(raw[len(header):], '<f8').tolist() == [1, 2, 3, 4, 5, 6]


def test_vector_is_one_row():
    raw = encode_matrix(np.arange(4.0))
    assert raw.startswith(b'CTMAT 1 1 4\n')
    assert decode_matrix(raw).shape == (1, 4)


def test_write_and_read(tmpdir):
    path = os.path.join(tmpdir, 'phantom.ctmat')
    m = np.random.default_rng(3).standard_normal((64, 64))
    size = write_matrix(path, m)
    assert size == len(b'CTMAT 1 64 64\n') + 64 * 64 * 8
    assert os.path.getsize(path) == size
    back = read_matrix(path)
    assert back.dtype == np.float64
    assert np.array_equal(back, m)


@pytest.mark.parametrize('raw, message', (
    (b'CTMAT 1 2 2', 'missing header'),
    (b'MATX 1 1 1\n' + bytes(8), 'bad header'),
    (b'CTMAT 1 x 1\n' + bytes(8), 'bad header'),
    (b'CTMAT 2 1 1\n' + bytes(8), 'unsupported format version 2'),
    (b'CTMAT 1 0 1\n', 'bad dimensions'),
    (b'CTMAT 1 2 2\n' + bytes(24), 'payload bytes'),
))
def test_decode_errors(raw, message):
    with pytest.raises(MatrixFileError) as e:
        decode_matrix(raw)
    assert message in str(e.value)


def test_encode_errors():
    with pytest.raises(MatrixFileError):
        encode_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(MatrixFileError):
        encode_matrix(np.zeros((0, 3)))


def test_read_error_names_path(tmpdir):
    path = os.path.join(tmpdir, 'broken.ctmat')
    with open(path, 'wb') as f:
        f.write(b'CTMAT 1 1 1\n')
    with pytest.raises(MatrixFileError) as e:
        read_matrix(path)
    assert path in str(e.value)
    with pytest.raises(OSError):
        read_matrix(os.path.join(tmpdir, 'missing.ctmat'))


def test_preview_pixels():
    m = np.array([[-0.5, 0.0, 0.5], [1.0, 2.0, 0.25]])
    assert preview_pixels(m).tolist() == [[0, 0, 128], [255, 255, 64]]
    assert preview_pixels(m, -1.0, 1.0)[0].tolist() == [64, 128, 191]


def test_write_preview(tmpdir):
    path = os.path.join(tmpdir, 'zeros.png')
    write_preview(path, np.zeros((8, 8)))
    with Image.open(path) as image:
        assert image.mode == 'L'
        assert image.size == (8, 8)
        assert np.asarray(image).max() == 0
