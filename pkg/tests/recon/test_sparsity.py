import numpy as np
import pytest

from edgect.lib.errors import InvalidArgumentError
from edgect.recon.phantom import shepp_logan
from edgect.recon.sparsity import (TV, AnisotropicTV, SparsityTransform, build_mask,
                                   check_mask, edge_count, transform_class, true_mask,
                                   tv_adjoint, tv_apply, tv_seminorm)


def step_image():
    image = np.zeros((4, 4))
    image[:, 2:] = 1.0
    return image


def dense_tv(size_n):
    columns = []
    basis = np.zeros(size_n * size_n)
    for j in range(basis.size):
        basis[j] = 1.0
        columns.append(tv_apply(basis.reshape(size_n, size_n)))
        basis[j] = 0.0
    return np.column_stack(columns)


def loop_differences(image):
    size_n = image.shape[0]
    diffs = []
    for i in range(size_n):
        for j in range(size_n):
            if j < size_n - 1:
                diffs.append(image[i, j + 1] - image[i, j])
            if i < size_n - 1:
                diffs.append(image[i + 1, j] - image[i, j])
    return diffs


def piecewise_constant(rng, size_n=32, block=4):
    levels = rng.integers(0, 4, size=(size_n // block, size_n // block)) / 4
    return np.kron(levels, np.ones((block, block)))


def test_transform_class():
    assert transform_class('AnisotropicTV') is AnisotropicTV
    assert transform_class('anisotropictv') is AnisotropicTV
    with pytest.raises(InvalidArgumentError):
        transform_class('haar')


def test_constant_image():
    image = np.full((8, 8), 0.7)
    assert np.array_equal(tv_apply(image), np.zeros(128))
    assert tv_seminorm(image) == 0
    assert np.array_equal(true_mask(image), np.ones(128))


def test_step_image():
    field = tv_apply(step_image())
    assert field.shape == (32, )
    horizontal, vertical = field.reshape(2, 4, 4)
    expected = np.zeros((4, 4))
    expected[:, 1] = 1.0
    assert np.array_equal(horizontal, expected)
    assert np.array_equal(vertical, np.zeros((4, 4)))
    assert tv_seminorm(step_image()) == 4


def test_boundary_entries_zero():
    field = tv_apply(np.random.default_rng(1).standard_normal((8, 8)))
    horizontal, vertical = field.reshape(2, 8, 8)
    assert np.all(horizontal[:, -1] == 0)
    assert np.all(vertical[-1, :] == 0)


def test_shepp_logan_against_loops():
    image = shepp_logan(64)
    diffs = loop_differences(image)
    assert tv_seminorm(image) == pytest.approx(sum(abs(d) for d in diffs), rel=1e-12)
    nonzero = sum(1 for d in diffs if abs(d) > 1e-12)
    assert edge_count(true_mask(image)) == nonzero


def test_zero_field():
    assert np.array_equal(tv_adjoint(np.zeros(32)), np.zeros((4, 4)))


@pytest.mark.parametrize('size_n', (4, 16, 64))
def test_adjoint(size_n):
    rng = np.random.default_rng(size_n)
    for _ in range(20):
        u = rng.standard_normal((size_n, size_n))
        v = rng.standard_normal(2 * size_n * size_n)
        du = tv_apply(u)
        lhs = float(du @ v)
        rhs = float(np.sum(u * tv_adjoint(v)))
        assert abs(lhs - rhs) <= 1e-14 * np.linalg.norm(du) * np.linalg.norm(v)


def test_adjoint_matches_dense_transpose():
    matrix = dense_tv(4)
    v = np.random.default_rng(4).integers(-5, 6, size=32).astype(float)
    assert np.array_equal(tv_adjoint(v).ravel(), matrix.T @ v)


def test_field_errors():
    with pytest.raises(InvalidArgumentError):
        tv_adjoint(np.zeros(31))
    with pytest.raises(InvalidArgumentError):
        tv_adjoint(np.zeros(30))
    with pytest.raises(InvalidArgumentError):
        tv_apply(np.zeros((4, 5)))


def test_build_mask():
    field = tv_apply(step_image())
    assert np.array_equal(build_mask(field, 1.5), np.ones(32))
    mask = build_mask(field, 0.5)
    assert mask.dtype == np.uint8
    assert edge_count(mask) == 4
    assert np.array_equal(mask == 0, field == 1.0)
    # the step mask and the true mask coincide
    assert np.array_equal(mask, true_mask(step_image()))


@pytest.mark.parametrize('tau', (0, -0.3))
def test_build_mask_bad_tau(tau):
    with pytest.raises(InvalidArgumentError):
        build_mask(np.zeros(32), tau)


def test_mask_monotone_in_tau():
    rng = np.random.default_rng(42)
    for _ in range(100):
        field = rng.standard_normal(2 * 8 * 8) * rng.uniform(0.1, 2)
        tau1, tau2 = sorted(rng.uniform(0.01, 2, size=2))
        zeros1 = build_mask(field, tau1) == 0
        zeros2 = build_mask(field, tau2) == 0
        assert not np.any(zeros2 & ~zeros1)


def test_true_mask_annihilates():
    rng = np.random.default_rng(7)
    for _ in range(10):
        image = piecewise_constant(rng)
        field = tv_apply(image)
        mask = true_mask(image)
        assert np.linalg.norm(mask * field) == 0
        # idempotent as a diagonal operator
        assert np.array_equal(mask * (mask * field), mask * field)


def test_check_mask():
    assert check_mask(np.ones(32, dtype=np.uint8), 4).dtype == np.float64
    with pytest.raises(InvalidArgumentError):
        check_mask(np.ones(30), 4)
    with pytest.raises(InvalidArgumentError):
        check_mask(np.full(32, 0.5), 4)


def test_seminorm_is_l1():
    image = np.random.default_rng(8).standard_normal((16, 16))
    assert TV.seminorm(image) == np.abs(TV.apply(image)).sum()
    assert TV.field_length(16) == 512


def test_linked_regions():
    count, labels = TV.linked_regions(true_mask(step_image()))
    assert count == 2
    image = labels.reshape(4, 4)
    assert len(set(image[:, :2].ravel())) == 1
    assert len(set(image[:, 2:].ravel())) == 1
    assert image[0, 0] != image[0, 2]
    assert TV.linked_regions(np.ones(32))[0] == 1
    count, labels = TV.linked_regions(np.zeros(32))
    assert count == 16
    assert sorted(labels) == list(range(16))


def test_linked_regions_corner_contact():
    # pixels touching only at a corner are not linked
    image = np.zeros((4, 4))
    image[1, 1] = image[2, 2] = 1.0
    count, labels = TV.linked_regions(true_mask(image))
    assert count == 3
    assert labels[1 * 4 + 1] != labels[2 * 4 + 2]


def test_linked_regions_undefined():
    assert SparsityTransform().linked_regions(np.ones(8)) is None
