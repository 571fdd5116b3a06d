"""Brute-force references for the eigensolver.

Neither routine shares the iteration logic of :mod:`mildeig.eigensolver`:

* :func:`dense_linear_eigen` assembles ``T`` column by column for a linear
  instance and hands the dense matrix to LAPACK;
* :func:`newton_eigenpair` solves ``y - lam T(y) = 0`` together with the
  normalisation on the full discretisation by Newton's method with a
  finite-difference Jacobian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .lattice import Trajectory, norm_C, rescale_to_norm
from .problem import ProblemInstance, sine_profile

log = logging.getLogger(__name__)


def _T_flat(p: ProblemInstance, flat: np.ndarray) -> np.ndarray:
    y = Trajectory(p.L, flat.reshape(p.m + 1, p.n))
    return p.T(y, check=False, clamp=False).values.ravel()


def dense_T_matrix(p: ProblemInstance) -> np.ndarray:
    """Matrix of a linear ``T`` acting on flattened trajectories (row-major)."""
    if not (p.nonlinearity.linear and p.nonlocal_op.linear):
        raise ValueError("dense assembly needs linear f and B")
    size = (p.m + 1) * p.n
    cols = np.empty((size, size))
    basis = np.zeros(size)
    for k in range(size):
        basis[k] = 1.0
        cols[:, k] = _T_flat(p, basis)
        basis[k] = 0.0
    return cols


@dataclass
class DenseEigenResult:
    mu: float
    lam: float
    y: Trajectory
    gap: float


def dense_linear_eigen(p: ProblemInstance, rho: float = 1.0) -> DenseEigenResult:
    """Dominant eigenvalue ``mu`` of ``T`` and the eigenpair ``lam = 1/mu``."""
    M = dense_T_matrix(p)
    vals, vecs = np.linalg.eig(M)
    order = np.argsort(-np.abs(vals))
    top = order[0]
    mu = vals[top]
    if abs(mu.imag) > 1e-10 * abs(mu):
        raise ArithmeticError(f"dominant eigenvalue {mu} is not real")
    vec = np.real(vecs[:, top])
    vec *= np.sign(vec[np.argmax(np.abs(vec))])
    y = rescale_to_norm(Trajectory(p.L, vec.reshape(p.m + 1, p.n)), rho)
    gap = float(abs(vals[order[1]]) / abs(mu)) if len(vals) > 1 else 0.0
    return DenseEigenResult(float(mu.real), float(1.0 / mu.real), y, gap)


@dataclass
class NewtonResult:
    lam: float
    y: Trajectory
    iterations: int
    residual: float
    pinned: tuple


def newton_eigenpair(p: ProblemInstance, rho: float = 1.0, y0: Trajectory = None,
                     lam0: float = None, tol: float = 1e-12, max_iters: int = 40,
                     fd_step: float = 1e-7) -> NewtonResult:
    """Solve ``F(y, lam) = (y - lam T(y), y[pin] - rho) = 0``.

    The C-norm constraint is imposed on its active entry: the node of ``y0``
    where the maximum sits is pinned to ``rho``. If the converged maximum moves
    elsewhere the pin is moved and Newton restarts from there.
    """
    p = p.with_rho(rho)
    if y0 is None:
        y0 = rescale_to_norm(Trajectory.constant(sine_profile(p.L, p.n), p.m), rho)
    if lam0 is None:
        lam0 = rho / norm_C(p.T(y0, check=False, clamp=False))
    y = y0.values.ravel().copy()
    lam = float(lam0)
    size = y.size
    total = 0

    for _ in range(5):
        pin = int(np.argmax(np.abs(y)))
        for _ in range(max_iters):
            total += 1
            Ty = _T_flat(p, y)
            F = np.concatenate([y - lam * Ty, [y[pin] - rho]])
            if np.max(np.abs(F)) <= tol * rho:
                break
            J = np.zeros((size + 1, size + 1))
            for k in range(size):
                h = fd_step * max(1.0, abs(y[k]))
                yk = y.copy()
                yk[k] += h
                J[:size, k] = -lam * (_T_flat(p, yk) - Ty) / h
            J[:size, :size] += np.eye(size)
            J[:size, size] = -Ty
            J[size, pin] = 1.0
            delta = np.linalg.solve(J, -F)
            # halve the step until the residual decreases
            scale = 1.0
            base = np.linalg.norm(F)
            while scale > 1e-4:
                y_try = y + scale * delta[:size]
                lam_try = lam + scale * delta[size]
                F_try = np.concatenate([y_try - lam_try * _T_flat(p, y_try), [y_try[pin] - rho]])
                if np.linalg.norm(F_try) < base:
                    break
                scale /= 2
            y, lam = y_try, lam_try
        if int(np.argmax(np.abs(y))) == pin or np.max(np.abs(y)) <= rho * (1 + 1e-12):
            break
        log.info("maximum moved off the pinned node; re-pinning")
    res = float(np.max(np.abs(y - lam * _T_flat(p, y))))
    return NewtonResult(lam, Trajectory(p.L, y.reshape(p.m + 1, p.n)), total, res,
                        np.unravel_index(pin, (p.m + 1, p.n)))
