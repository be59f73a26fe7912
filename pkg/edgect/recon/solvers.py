# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Iterative reconstruction solvers.

- solve_masked_l2: edge-masked l2-regularized least squares,
      argmin ||R u - s||^2 + lam ||M D u||^2
- solve_exact_mask: the same problem with the fidelity term weighted
  heavily, approximating  argmin ||M D u||^2  subject to  R u = s
  and started from region_start, a direct fit over the regions the
  mask holds constant
- solve_tv_split_bregman: the anisotropic TV baseline
      argmin ||R u - s||^2 + lam ||D u||_1

All three run CGLS (cg_normal_equations) on a stacked operator, so only
applications of R, R^T, D and D^T are needed.
'''

import math
import time
from collections import namedtuple

import numpy as np

from edgect.lib.errors import InvalidArgumentError, NumericalFailureError
from edgect.lib.util import class_logger
from edgect.recon.projector import RayTables, forward_values
from edgect.recon.sparsity import TV, check_mask

logger = class_logger(__name__, 'Solvers')

DEFAULT_LAMBDA_LARGE = 1e6
SB_INNER_TOLERANCE = 1e-12
# Entries of the rays x regions matrix region_start() will build
MAX_REGION_MATRIX = 1 << 22


def _check_iterations(name, value):
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise InvalidArgumentError(f'{name} must be a positive integer, got {value!r}')


class CGConfig(namedtuple('CGConfig', 'max_iters rel_tolerance')):
    '''Stopping rule for cg_normal_equations.'''
    __slots__ = ()

    def __new__(cls, max_iters=500, rel_tolerance=1e-8):
        _check_iterations('max_iters', max_iters)
        if not 0 < rel_tolerance < 1:
            raise InvalidArgumentError('rel_tolerance must lie in (0, 1)')
        return super().__new__(cls, int(max_iters), float(rel_tolerance))


class MaskedL2Config(namedtuple('MaskedL2Config', 'lam max_iters rel_tolerance')):
    '''Regularization weight and CG stopping rule of the masked solver.'''
    __slots__ = ()

    def __new__(cls, lam=0.1, max_iters=500, rel_tolerance=1e-8):
        if not lam > 0:
            raise InvalidArgumentError(f'lambda must be positive, got {lam!r}')
        cg = CGConfig(max_iters, rel_tolerance)
        return super().__new__(cls, float(lam), cg.max_iters, cg.rel_tolerance)


# Polishes the start of region_start(), or solves from zero when there
# is none.
EXACT_MASK_CG = MaskedL2Config(lam=1.0, max_iters=5000, rel_tolerance=1e-14)


class SplitBregmanConfig(namedtuple('SplitBregmanConfig',
                                    'lam mu outer_iters inner_cg_iters')):
    '''TV weight, Bregman coupling weight and iteration counts.'''
    __slots__ = ()

    def __new__(cls, lam=0.01, mu=1.0, outer_iters=10, inner_cg_iters=10):
        if not (lam > 0 and mu > 0):
            raise InvalidArgumentError('Split Bregman lambda and mu must be positive')
        _check_iterations('outer_iters', outer_iters)
        _check_iterations('inner_cg_iters', inner_cg_iters)
        return super().__new__(cls, float(lam), float(mu), int(outer_iters),
                               int(inner_cg_iters))


SolveReport = namedtuple('SolveReport', 'iterations_used final_residual '
                         'wall_time_seconds objective_value residual_history')


def shrink(x, gamma):
    '''Soft thresholding: sign(x) * max(|x| - gamma, 0), element-wise.'''
    if not gamma > 0:
        raise InvalidArgumentError(f'shrink threshold must be positive, got {gamma!r}')
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


def cg_normal_equations(apply_A, apply_At, rhs, cfg, x0=None):
    '''Least squares min ||A x - rhs|| by CGLS, i.e. conjugate gradients on
    A^T A x = A^T rhs without forming A^T A.

    cfg supplies max_iters and rel_tolerance; iteration stops once
    ||A^T (rhs - A x)|| <= rel_tolerance * ||A^T rhs||.  The data residual
    ||rhs - A x|| after each iteration is recorded in residual_history;
    it never increases.  Returns (x, SolveReport).
    '''
    start = time.perf_counter()
    rhs = np.asarray(rhs, dtype=np.float64)
    projected = apply_At(rhs)
    reference = float(np.linalg.norm(projected))
    if reference == 0.0:
        # A^T rhs = 0: x = 0 attains the minimum
        x = np.zeros_like(projected)
        report = SolveReport(0, 0.0, time.perf_counter() - start,
                             float(rhs @ rhs), (float(np.linalg.norm(rhs)), ))
        return x, report

    if x0 is None:
        x = np.zeros_like(projected)
        residual = rhs.copy()
        gradient = projected
    else:
        x = np.array(x0, dtype=np.float64).ravel()
        residual = rhs - apply_A(x)
        gradient = apply_At(residual)
    direction = gradient.copy()
    gamma = float(gradient @ gradient)
    history = [float(np.linalg.norm(residual))]

    iterations = 0
    for iteration in range(1, cfg.max_iters + 1):
        if math.sqrt(gamma) <= cfg.rel_tolerance * reference:
            break
        q = apply_A(direction)
        delta = float(q @ q)
        if not math.isfinite(delta):
            raise NumericalFailureError('non-finite values in CG', iteration)
        if delta == 0.0:
            raise NumericalFailureError('CG breakdown: zero curvature direction', iteration)
        alpha = gamma / delta
        x += alpha * direction
        residual -= alpha * q
        gradient = apply_At(residual)
        gamma_next = float(gradient @ gradient)
        if not math.isfinite(gamma_next):
            raise NumericalFailureError('non-finite values in CG', iteration)
        direction *= gamma_next / gamma
        direction += gradient
        gamma = gamma_next
        iterations = iteration
        history.append(float(np.linalg.norm(residual)))
        logger.debug(f'iteration {iteration:,d} normal residual '
                     f'{math.sqrt(gamma) / reference:.3e}')

    report = SolveReport(iterations, math.sqrt(gamma) / reference,
                         time.perf_counter() - start, float(residual @ residual),
                         tuple(history))
    return x, report


def _check_problem(sino, geom):
    if sino.geometry != geom:
        raise InvalidArgumentError('sinogram geometry does not match')


def _stacked_operator(geom, transform, weights):
    '''apply/adjoint pair of the stacked operator [R; W D] where W is a
    diagonal weighting of the edge field.'''
    size_n = geom.size_n
    n_data = geom.n_angles * geom.n_detectors
    projector = RayTables(geom)

    def apply_A(x):
        image = x.reshape(size_n, size_n)
        return np.concatenate((projector.forward(image).ravel(),
                               weights * transform.apply(image)))

    def apply_At(y):
        data = y[:n_data].reshape(geom.sinogram_shape)
        image = projector.adjoint(data) + transform.adjoint(weights * y[n_data:])
        return image.ravel()

    return apply_A, apply_At


def masked_objective(u, sino, geom, mask, lam, transform=TV):
    '''||R u - s||^2 + lam ||M D u||^2 for a binary mask M.'''
    mask = check_mask(mask, geom.size_n, transform)
    misfit = forward_values(np.asarray(u, dtype=np.float64), geom) - sino.values
    masked = mask * transform.apply(u)
    return float(np.sum(misfit * misfit) + lam * np.sum(masked * masked))


def solve_masked_l2(sino, geom, mask, cfg=MaskedL2Config(), x0=None, transform=TV):
    '''Minimize ||R u - s||^2 + lam ||M D u||^2 by CGLS on the normal
    equations (R^T R + lam D^T M D) u = R^T s.  M is binary so M^T M = M
    and the mask is applied once per operator application.

    Starts from the zero image unless x0 is given.  Returns (u, SolveReport).
    '''
    start = time.perf_counter()
    _check_problem(sino, geom)
    mask = check_mask(mask, geom.size_n, transform)
    weights = math.sqrt(cfg.lam) * mask
    apply_A, apply_At = _stacked_operator(geom, transform, weights)
    rhs = np.concatenate((sino.values.ravel(), np.zeros(mask.size)))
    x, report = cg_normal_equations(apply_A, apply_At, rhs, cfg, x0=x0)
    u = x.reshape(geom.size_n, geom.size_n)
    objective = masked_objective(u, sino, geom, mask, cfg.lam, transform)
    report = report._replace(wall_time_seconds=time.perf_counter() - start,
                             objective_value=objective)
    logger.info(f'masked l2 solve: {report.iterations_used:,d} iterations, '
                f'residual {report.final_residual:.3e}, '
                f'{report.wall_time_seconds:.2f}s')
    return u, report


def _region_matrix(projector, labels, count):
    '''R P, P being the pixels x regions indicator matrix: column r is the
    projection of the indicator image of region r.'''
    geom = projector.geom
    size_n, n_detectors = geom.size_n, geom.n_detectors
    padded = np.full((size_n + 2, size_n + 2), -1, dtype=np.intp)
    padded[1:-1, 1:-1] = labels.reshape(size_n, size_n)
    padded = padded.ravel()
    rays = np.arange(n_detectors)[:, None]
    matrix = np.zeros((geom.n_angles, n_detectors * count))
    for row, (idx0, idx1, w0, w1) in enumerate(projector.tables):
        for idx, w in ((idx0, w0), (idx1, w1)):
            region = padded[idx]
            inside = region >= 0
            cells = np.broadcast_to(rays, idx.shape)[inside] * count + region[inside]
            matrix[row] += np.bincount(cells, weights=w[inside],
                                       minlength=n_detectors * count)
    return matrix.reshape(-1, count)


def region_start(sino, geom, mask, transform=TV):
    '''The minimum-norm least-squares fit to the sinogram among images
    constant on every region the mask links, i.e. with M D u = 0.

    For consistent data whose truth has M D u = 0 this is the minimizer
    of ||M D u||^2 subject to R u = s closest to zero; it is the truth
    whenever the fit is unique.  Returns None when the transform defines
    no regions or the region matrix would exceed MAX_REGION_MATRIX
    entries.
    '''
    _check_problem(sino, geom)
    mask = check_mask(mask, geom.size_n, transform)
    regions = transform.linked_regions(mask)
    if regions is None:
        return None
    count, labels = regions
    n_data = geom.n_angles * geom.n_detectors
    if n_data * count > MAX_REGION_MATRIX:
        logger.info(f'{count:,d} mask regions: too many for a direct start')
        return None
    matrix = _region_matrix(RayTables(geom), labels, count)
    # scaling by sqrt(region size) makes the minimum norm the pixel norm
    scale = 1.0 / np.sqrt(np.bincount(labels, minlength=count))
    fit, _residues, rank, _sv = np.linalg.lstsq(matrix * scale, sino.values.ravel(),
                                                rcond=None)
    if rank < count:
        logger.warning(f'mask regions not determined by the data: rank {rank:,d} '
                       f'of {count:,d} regions')
    return (fit * scale)[labels].reshape(geom.size_n, geom.size_n)


def solve_exact_mask(sino, geom, mask, lambda_large=DEFAULT_LAMBDA_LARGE,
                     cg=EXACT_MASK_CG, transform=TV):
    '''Approximate argmin ||M D u||^2 subject to R u = s by the penalty form
    lambda_large ||R u - s||^2 + ||M D u||^2.

    That has the minimizer of solve_masked_l2 with lam = 1 / lambda_large;
    the lam of cg is ignored, only its stopping rule is used.  CG starts
    from region_start() when it gives a start.  The reported objective
    is the penalty-form value.
    '''
    if not lambda_large > 0:
        raise InvalidArgumentError(f'lambda_large must be positive, got {lambda_large!r}')
    cfg = MaskedL2Config(1.0 / lambda_large, cg.max_iters, cg.rel_tolerance)
    x0 = region_start(sino, geom, mask, transform)
    u, report = solve_masked_l2(sino, geom, mask, cfg, x0=x0, transform=transform)
    objective = lambda_large * masked_objective(u, sino, geom, mask, cfg.lam, transform)
    return u, report._replace(objective_value=objective)


def tv_objective(u, sino, geom, lam, transform=TV):
    '''||R u - s||^2 + lam ||D u||_1.'''
    misfit = forward_values(np.asarray(u, dtype=np.float64), geom) - sino.values
    return float(np.sum(misfit * misfit) + lam * transform.seminorm(u))


def solve_tv_split_bregman(sino, geom, cfg=SplitBregmanConfig(), transform=TV):
    '''Anisotropic TV reconstruction by Split Bregman.  Each outer
    iteration

      a) runs inner_cg_iters CGLS iterations on
         (R^T R + mu D^T D) u = R^T s + mu D^T (d - b), warm started,
      b) d <- shrink(D u + b, lam / mu),
      c) b <- b + D u - d.

    The report counts the inner CG iterations of all outer iterations.
    '''
    start = time.perf_counter()
    _check_problem(sino, geom)
    size_n = geom.size_n
    field_length = transform.field_length(size_n)
    sqrt_mu = math.sqrt(cfg.mu)
    apply_A, apply_At = _stacked_operator(geom, transform,
                                          np.full(field_length, sqrt_mu))
    inner = CGConfig(cfg.inner_cg_iters, SB_INNER_TOLERANCE)
    data = sino.values.ravel()

    u = np.zeros(size_n * size_n)
    d = np.zeros(field_length)
    b = np.zeros(field_length)
    iterations = 0
    residual = 0.0
    history = []
    for outer in range(cfg.outer_iters):
        rhs = np.concatenate((data, sqrt_mu * (d - b)))
        u, report = cg_normal_equations(apply_A, apply_At, rhs, inner, x0=u)
        iterations += report.iterations_used
        residual = report.final_residual
        history.extend(report.residual_history)
        du = transform.apply(u.reshape(size_n, size_n))
        d = shrink(du + b, cfg.lam / cfg.mu)
        b += du - d
        if not np.all(np.isfinite(b)):
            raise NumericalFailureError('non-finite Bregman variable', iterations)
        logger.debug(f'outer iteration {outer + 1}: {report.iterations_used} '
                     f'inner iterations')

    image = u.reshape(size_n, size_n)
    report = SolveReport(iterations, residual, time.perf_counter() - start,
                         tv_objective(image, sino, geom, cfg.lam, transform),
                         tuple(history))
    logger.info(f'split Bregman solve: {cfg.outer_iters} outer, '
                f'{iterations:,d} inner iterations, {report.wall_time_seconds:.2f}s')
    return image, report
