"""Krylov solvers: LSQR for least squares and CG for Hermitian systems.

Operators follow the :class:`scipy.sparse.linalg.LinearOperator` protocol
(``shape``, ``matvec``, ``rmatvec``); dense arrays are accepted as well.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import aslinearoperator

DEFAULT_TOL = 1e-8


class NotPositiveDefiniteError(ValueError):
    """CG met a direction of nonpositive curvature."""


@dataclass(frozen=True)
class SolverStats:
    iterations: int
    final_relative_residual: float
    converged: bool
    wall_time: float


def iteration_bound(kappa: float, tau: float) -> int:
    """Smallest ``i`` with ``2 exp(-2 i / sqrt(kappa)) <= tau``.

    This is where the CG error envelope ``2 ((sqrt(k) - 1) / (sqrt(k) + 1))^i``
    falls below ``tau`` after the bound ``(s - 1)/(s + 1) <= exp(-2/s)``.
    """
    if kappa < 1:
        raise ValueError("condition number must be at least 1")
    if not 0 < tau:
        raise ValueError("tau must be positive")
    return max(0, math.ceil(math.sqrt(kappa) / 2 * math.log(2 / tau)))


def default_lsqr_max_iter(tol: float = DEFAULT_TOL) -> int:
    """Ten times the bound for the worst condition number ``3`` of the
    well-sampled regime."""
    return 10 * iteration_bound(3.0, tol)


def check_adjoint(A, rng: Optional[np.random.Generator] = None, tol: float = 1e-10) -> float:
    """Relative mismatch of ``<A x, y>`` and ``<x, A^* y>`` on a random probe."""
    A = aslinearoperator(A)
    rng = np.random.default_rng(0) if rng is None else rng
    m, n = A.shape
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    lhs = np.vdot(y, A.matvec(x))
    rhs = np.vdot(A.rmatvec(y), x)
    err = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    if err > tol:
        raise AssertionError(f"adjoint mismatch {err:.2e}")
    return err


def lsqr_solve(A, b, tol: float = DEFAULT_TOL, max_iter: Optional[int] = None,
               callback: Optional[Callable] = None):
    """Minimize ``||A x - b||_2`` by Golub-Kahan bidiagonalization.

    Stops once either ``||r|| <= tol ||b||`` or
    ``||A^* r|| <= tol ||A^* b||``; both norms are available from the
    recurrences without extra operator calls. Each iteration costs one
    product with ``A`` and one with ``A^*``.

    Returns
    -------
    x : ndarray
    stats : SolverStats
        ``final_relative_residual`` is the smaller of the two ratios.
    """
    t0 = time.perf_counter()
    A = aslinearoperator(A)
    m, n = A.shape
    max_iter = default_lsqr_max_iter(tol) if max_iter is None else int(max_iter)
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, A.dtype, np.float64)
    x = np.zeros(n, dtype=dtype)

    beta = np.linalg.norm(b)
    if beta == 0:
        return x, SolverStats(0, 0.0, True, time.perf_counter() - t0)
    u = b.astype(dtype) / beta
    v = np.asarray(A.rmatvec(u), dtype=dtype)
    alpha = np.linalg.norm(v)
    if alpha == 0:
        return x, SolverStats(0, 0.0, True, time.perf_counter() - t0)
    v = v / alpha
    w = v.copy()
    phibar, rhobar = beta, alpha
    bnorm, atb_norm = beta, alpha * beta
    rel, it, converged = 1.0, 0, False

    for it in range(1, max_iter + 1):
        u = np.asarray(A.matvec(v), dtype=dtype) - alpha * u
        beta = np.linalg.norm(u)
        if beta > 0:
            u = u / beta
        v = np.asarray(A.rmatvec(u), dtype=dtype) - beta * v
        alpha = np.linalg.norm(v)
        if alpha > 0:
            v = v / alpha

        rho = math.hypot(rhobar, beta)
        c, s = rhobar / rho, beta / rho
        theta = s * alpha
        rhobar = -c * alpha
        phi = c * phibar
        phibar = s * phibar

        x = x + (phi / rho) * w
        w = v - (theta / rho) * w
        if callback is not None:
            callback(x)

        rel = min(phibar / bnorm, phibar * alpha * abs(c) / atb_norm)
        if rel <= tol:
            converged = True
            break
    return x, SolverStats(it, float(rel), converged, time.perf_counter() - t0)


def cg_solve(A, b, tol: float = DEFAULT_TOL, max_iter: Optional[int] = None,
             callback: Optional[Callable] = None):
    """Conjugate gradients for Hermitian positive definite ``A``.

    Stops when ``||b - A x|| <= tol ||b||``. ``callback(x)`` receives every
    iterate. Raises :class:`NotPositiveDefiniteError` on nonpositive
    curvature.
    """
    t0 = time.perf_counter()
    A = aslinearoperator(A)
    m = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise ValueError("CG needs a square operator")
    max_iter = m if max_iter is None else int(max_iter)
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, A.dtype, np.float64)
    x = np.zeros(m, dtype=dtype)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, SolverStats(0, 0.0, True, time.perf_counter() - t0)
    r = b.astype(dtype)
    p = r.copy()
    rr = np.vdot(r, r).real
    rel, it, converged = 1.0, 0, False
    for it in range(1, max_iter + 1):
        Ap = np.asarray(A.matvec(p), dtype=dtype)
        curv = np.vdot(p, Ap).real
        if not curv > 0:
            raise NotPositiveDefiniteError(f"nonpositive curvature {curv:.3e} at iteration {it}")
        step = rr / curv
        x = x + step * p
        r = r - step * Ap
        if callback is not None:
            callback(x)
        rr_new = np.vdot(r, r).real
        rel = math.sqrt(rr_new) / bnorm
        if rel <= tol:
            converged = True
            break
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, SolverStats(it, float(rel), converged, time.perf_counter() - t0)
