"""Approximation from lattice samples: the classical rule, least squares on
subsampled lattices, and kernel interpolation."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft

from .freqsets import FrequencySet, enumerate_set, residues
from .korobov import KorobovSpace, kernel_at
from .lattice import Lattice, classical_radius, is_reconstructing, lattice_points, s_n_kernel
from .sampling import FULL, SubsampleIndex
from .solvers import DEFAULT_TOL, SolverStats, cg_solve, lsqr_solve
from .transforms import CirculantKernelOperator, LatticeOperator

CLASSICAL = "classical"
LEAST_SQUARES = "least-squares"

_CHUNK = 1 << 22

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FourierApproximant:
    """Trigonometric polynomial ``sum_{h in B} g_h exp(2 pi i <h, x>)``."""

    B: FrequencySet
    coeffs: np.ndarray
    method: str
    lat: Lattice
    J: Optional[SubsampleIndex] = None
    stats: Optional[SolverStats] = None

    def __post_init__(self):
        if len(self.coeffs) != len(self.B):
            raise ValueError("coefficient count does not match the frequency set")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")


@dataclass(frozen=True, eq=False)
class KernelApproximant:
    """Kernel expansion ``sum_k a_k K(x, x_k)`` over distinct lattice rows."""

    space: KorobovSpace
    lat: Lattice
    rows: np.ndarray
    coeffs: np.ndarray
    J: Optional[SubsampleIndex] = None
    stats: Optional[SolverStats] = None

    def __post_init__(self):
        if len(self.coeffs) != len(self.rows):
            raise ValueError("coefficient count does not match the rows")


def _is_full(lat, J):
    return J is None or (J.plan.mode == FULL and len(J) == lat.n
                         and np.array_equal(J.entries, np.arange(lat.n)))


def classical_approximate(space: KorobovSpace, lat: Lattice, samples,
                          M: Optional[float] = None) -> FourierApproximant:
    """Lattice rule ``g_h = (1/n) sum_k f(x_k) exp(-2 pi i k <h, z> / n)``.

    ``M`` defaults to ``1 / sqrt(S_n)``.
    """
    samples = np.asarray(samples)
    if samples.shape != (lat.n,):
        raise ValueError(f"expected {lat.n} samples")
    if M is None:
        M = classical_radius(s_n_kernel(space, lat))
    B = enumerate_set(space, M)
    if len(B) == 0:
        raise ValueError(f"frequency set for M={M} is empty")
    op = LatticeOperator(lat, B)
    return FourierApproximant(op.B, op.adjoint(samples) / lat.n, CLASSICAL, lat)


def lsq_fit(space: KorobovSpace, lat: Lattice, B: FrequencySet, J: Optional[SubsampleIndex],
            samples, tol: float = DEFAULT_TOL, max_iter: Optional[int] = None,
            check: bool = False) -> FourierApproximant:
    """Least squares fit ``argmin ||L_{J,B} g - f_J||`` over the frequencies ``B``.

    For the full lattice the normal matrix is ``n I`` and the solution is
    ``L_B^* f / n``. Otherwise LSQR runs on the subsampled operator;
    nonconvergence is recorded in ``stats``. ``check=True`` verifies the
    reconstructing property first.
    """
    if len(B) == 0:
        raise ValueError("frequency set must be nonempty")
    if check:
        ok, witness = is_reconstructing(lat, B)
        if not ok:
            raise ValueError(f"lattice does not reconstruct B: {witness} collide")
    samples = np.asarray(samples)
    op = LatticeOperator(lat, B, None if _is_full(lat, J) else J)
    if samples.shape != (op.shape[0],):
        raise ValueError(f"expected {op.shape[0]} samples, got {samples.shape}")
    if op.J is None:
        stats = SolverStats(0, 0.0, True, 0.0)
        return FourierApproximant(op.B, op.adjoint(samples) / lat.n, LEAST_SQUARES, lat, J, stats)
    if len(J) < len(B):
        raise ValueError(f"need |J| >= |B|, got {len(J)} < {len(B)}")
    coeffs, stats = lsqr_solve(op.as_linear_operator(), samples.astype(complex), tol, max_iter)
    if not stats.converged:
        warnings.warn(f"LSQR stopped after {stats.iterations} iterations "
                      f"at relative residual {stats.final_relative_residual:.2e}")
    return FourierApproximant(op.B, coeffs, LEAST_SQUARES, lat, J, stats)


def kernel_fit(space: KorobovSpace, lat: Lattice, J: Optional[SubsampleIndex], samples,
               tol: float = DEFAULT_TOL, max_iter: Optional[int] = None) -> KernelApproximant:
    """Kernel interpolant through the samples at rows ``J``.

    Repeated rows make the kernel matrix singular, so duplicates are merged
    and the sample at the first occurrence is kept. The full lattice is
    solved by division in the Fourier domain, subsets by CG.
    """
    samples = np.asarray(samples)
    if _is_full(lat, J):
        if samples.shape != (lat.n,):
            raise ValueError(f"expected {lat.n} samples")
        op = CirculantKernelOperator(space, lat)
        coeffs = op.solve_full(samples)
        return KernelApproximant(space, lat, np.arange(lat.n), coeffs, J, SolverStats(0, 0.0, True, 0.0))
    if samples.shape != (len(J),):
        raise ValueError(f"expected {len(J)} samples, got {samples.shape}")
    rows, first = np.unique(J.entries, return_index=True)
    if len(rows) < len(J):
        log.info("kernel fit merged %d repeated rows", len(J) - len(rows))
    op = CirculantKernelOperator(space, lat, rows=rows)
    coeffs, stats = cg_solve(op.as_linear_operator(), samples[first], tol, max_iter)
    if np.isrealobj(samples):
        coeffs = coeffs.real
    if not stats.converged:
        warnings.warn(f"CG stopped after {stats.iterations} iterations "
                      f"at relative residual {stats.final_relative_residual:.2e}")
    return KernelApproximant(space, lat, rows, coeffs, J, stats)


def evaluate(approx, points) -> np.ndarray:
    """Values of an approximant at points of shape (m, d)."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(approx, FourierApproximant):
        H = approx.B.indices
        if X.shape[1] != H.shape[1]:
            raise ValueError("point dimension does not match the approximant")
        out = np.empty(len(X), dtype=complex)
        step = max(1, _CHUNK // max(1, len(H)))
        for s in range(0, len(X), step):
            phase = np.exp(2j * np.pi * (X[s : s + step] @ H.T))
            out[s : s + step] = phase @ approx.coeffs
        return out
    if X.shape[1] != approx.space.d:
        raise ValueError("point dimension does not match the approximant")
    nodes = lattice_points(approx.lat, approx.rows)
    out = np.zeros(len(X), dtype=np.result_type(approx.coeffs.dtype, float))
    step = max(1, _CHUNK // max(1, len(nodes) * approx.space.d))
    for s in range(0, len(X), step):
        diff = X[s : s + step, None, :] - nodes[None, :, :]
        out[s : s + step] = kernel_at(approx.space, np.mod(diff, 1.0)) @ approx.coeffs
    return out


def evaluate_on_shifted_lattice(approx, shift) -> np.ndarray:
    """Values at ``(k z / n + shift) mod 1`` for ``k = 0..n-1`` by one FFT pass."""
    lat = approx.lat
    shift = np.asarray(shift, dtype=float).reshape(-1)
    if len(shift) != lat.d:
        raise ValueError("shift dimension does not match the lattice")
    if isinstance(approx, FourierApproximant):
        rotated = approx.coeffs * np.exp(2j * np.pi * (approx.B.indices @ shift))
        return LatticeOperator(lat, approx.B).forward(rotated)
    # values_i = sum_k a_k K(x_{i-k} + shift, 0): a circular convolution
    c = kernel_at(approx.space, np.mod(lattice_points(lat) + shift, 1.0))
    a = np.zeros(lat.n, dtype=np.result_type(approx.coeffs.dtype, float))
    np.add.at(a, approx.rows, approx.coeffs)
    out = scipy.fft.ifft(scipy.fft.fft(c) * scipy.fft.fft(a))
    return out.real if np.isrealobj(approx.coeffs) else out
