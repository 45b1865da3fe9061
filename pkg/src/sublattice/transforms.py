"""Length-n Fourier transforms and the lattice operators built on them.

Conventions: ``dft`` is the unnormalized transform with the ``+i`` sign,
``X_m = sum_k x_k exp(2 pi i k m / n)``, and ``idft`` uses ``-i``, so that
``idft(dft(x)) = n x``. With residues ``rho_h = <h, z> mod n`` the lattice
matrix ``L[k, h] = exp(2 pi i k rho_h / n)`` is applied by one scatter and
one ``dft``; its adjoint by one ``idft`` and one gather.

The operators allocate their buffers per call and hold no mutable state,
so a single instance may be shared between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator

from .freqsets import FrequencySet, complement_min_r, residues
from .korobov import KorobovSpace, kernel_at, weight_r
from .lattice import Lattice, lattice_points, residues_of, s_n_kernel
from .sampling import SubsampleIndex

# ---------------------------------------------------------------------------
# DFT engine

_BACKEND = "pocketfft"


def dft(x, backend: Optional[str] = None) -> np.ndarray:
    """Unnormalized DFT with ``+i`` sign along the last axis."""
    x = np.asarray(x, dtype=complex)
    if (backend or _BACKEND) == "bluestein":
        return bluestein(x, sign=+1)
    return scipy.fft.ifft(x, norm="forward")


def idft(x, backend: Optional[str] = None) -> np.ndarray:
    """Unnormalized DFT with ``-i`` sign; ``idft(dft(x)) = n x``."""
    x = np.asarray(x, dtype=complex)
    if (backend or _BACKEND) == "bluestein":
        return bluestein(x, sign=-1)
    return scipy.fft.fft(x)


def naive_dft(x, sign: int = +1) -> np.ndarray:
    """O(n^2) reference transform ``sum_k x_k exp(sign 2 pi i k m / n)``."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    km = np.outer(np.arange(n), np.arange(n)) % n
    return x @ np.exp(sign * 2j * np.pi * km / n)


def bluestein(x, sign: int = +1) -> np.ndarray:
    """Chirp-z evaluation of a length-n DFT through a power-of-two convolution.

    Uses ``k m = (k^2 + m^2 - (m - k)^2) / 2``; the chirp phases are reduced
    modulo ``2n`` in integer arithmetic before exponentiation.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if n <= 1:
        return x.copy()
    j = np.arange(n, dtype=np.int64)
    chirp = np.exp(sign * 1j * np.pi * ((j * j) % (2 * n)) / n)
    size = 1 << (2 * n - 2).bit_length()
    a = np.zeros(x.shape[:-1] + (size,), dtype=complex)
    a[..., :n] = x * chirp
    b = np.zeros(size, dtype=complex)
    b[:n] = np.conj(chirp)
    b[size - n + 1 :] = np.conj(chirp[1:][::-1])
    conv = np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))
    return chirp * conv[..., :n]


# ---------------------------------------------------------------------------
# lattice operator


class LatticeOperator:
    """The matrix ``L_{J,B} = [exp(2 pi i k rho_h / n)]_{k in J, h in B}``.

    ``J=None`` means the full lattice. Repeated entries of ``J`` give
    repeated rows.
    """

    def __init__(self, lat: Lattice, B: FrequencySet, J: Optional[SubsampleIndex] = None):
        if len(B) == 0:
            raise ValueError("frequency set must be nonempty")
        if B.residues is None:
            B = residues(B, lat)
        if J is not None and J.n != lat.n:
            raise ValueError("subsample was drawn for a different lattice size")
        self.lat = lat
        self.B = B
        self.J = J
        self.rows = np.arange(lat.n) if J is None else J.entries

    @property
    def n(self) -> int:
        return self.lat.n

    @property
    def shape(self) -> tuple:
        return (len(self.rows), len(self.B))

    # full lattice
    def forward(self, coeffs) -> np.ndarray:
        """``L_B a`` on all ``n`` lattice points."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (len(self.B),):
            raise ValueError(f"expected {len(self.B)} coefficients, got {coeffs.shape}")
        spectrum = np.zeros(self.n, dtype=complex)
        np.add.at(spectrum, self.B.residues, coeffs)
        return dft(spectrum)

    def adjoint(self, values) -> np.ndarray:
        """``L_B^* f`` for values on all ``n`` lattice points."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (self.n,):
            raise ValueError(f"expected {self.n} lattice values, got {values.shape}")
        return idft(values)[self.B.residues]

    # rows J
    def apply(self, coeffs) -> np.ndarray:
        """``L_{J,B} a``."""
        return self.forward(coeffs)[self.rows]

    def apply_adjoint(self, values) -> np.ndarray:
        """``L_{J,B}^* y``; repeated rows accumulate."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (len(self.rows),):
            raise ValueError(f"expected {len(self.rows)} values, got {values.shape}")
        buf = np.zeros(self.n, dtype=complex)
        np.add.at(buf, self.rows, values)
        return self.adjoint(buf)

    def dense(self) -> np.ndarray:
        """Explicit matrix, for testing and diagnostics."""
        k = np.asarray(self.rows, dtype=np.int64)
        phase = np.outer(k, self.B.residues) % self.n
        return np.exp(2j * np.pi * phase / self.n)

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.apply, rmatvec=self.apply_adjoint,
                              dtype=complex)


def lfft_forward(op: LatticeOperator, coeffs) -> np.ndarray:
    return op.forward(coeffs)


def lfft_adjoint(op: LatticeOperator, values) -> np.ndarray:
    return op.adjoint(values)


def subsampled_apply(op: LatticeOperator, coeffs) -> np.ndarray:
    return op.apply(coeffs)


def subsampled_adjoint(op: LatticeOperator, values) -> np.ndarray:
    return op.apply_adjoint(values)


# ---------------------------------------------------------------------------
# circulant kernel matrix


class CirculantKernelOperator:
    """Kernel matrix ``[K(x_k, x_k')]`` on a lattice, restricted to rows ``J``.

    On the full lattice the matrix is circulant with first column
    ``c_k = K(x_k, 0)``; ``symbol = idft(c)`` holds its eigenvalues.
    """

    def __init__(self, space: KorobovSpace, lat: Lattice, J: Optional[SubsampleIndex] = None,
                 rows=None):
        if lat.d != space.d:
            raise ValueError("lattice and space dimensions differ")
        self.space = space
        self.lat = lat
        self.J = J
        if rows is None:
            rows = np.arange(lat.n) if J is None else J.entries
        self.rows = np.asarray(rows, dtype=np.int64)
        if self.rows.size and (self.rows.min() < 0 or self.rows.max() >= lat.n):
            raise ValueError("row index out of range")
        self.column = kernel_at(space, lattice_points(lat))
        spectrum = idft(self.column)
        scale = np.abs(spectrum).max()
        if np.any(spectrum.real < -1e-8 * scale) or np.any(np.abs(spectrum.imag) > 1e-8 * scale):
            raise ValueError("kernel symbol is not positive on this lattice")
        self.symbol = spectrum.real

    @property
    def n(self) -> int:
        return self.lat.n

    @property
    def shape(self) -> tuple:
        return (len(self.rows), len(self.rows))

    def matvec(self, v) -> np.ndarray:
        """``P C P^* v`` by scatter, circular convolution and gather."""
        v = np.asarray(v)
        if v.shape != (len(self.rows),):
            raise ValueError(f"expected {len(self.rows)} entries, got {v.shape}")
        buf = np.zeros(self.n, dtype=complex)
        np.add.at(buf, self.rows, v)
        out = scipy.fft.ifft(self.symbol * scipy.fft.fft(buf))[self.rows]
        return out.real if np.isrealobj(v) else out

    def solve_full(self, values) -> np.ndarray:
        """``C^{-1} f`` on the full lattice by division in the Fourier domain."""
        values = np.asarray(values)
        if values.shape != (self.n,):
            raise ValueError(f"expected {self.n} lattice values")
        out = scipy.fft.ifft(scipy.fft.fft(values) / self.symbol)
        return out.real if np.isrealobj(values) else out

    def dense(self) -> np.ndarray:
        k = self.rows
        return self.column[(k[:, None] - k[None, :]) % self.n]

    def as_linear_operator(self) -> LinearOperator:
        dtype = complex
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=dtype)


def circulant_matvec(op: CirculantKernelOperator, v) -> np.ndarray:
    return op.matvec(v)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DiagnosticsReport:
    """Spectral quantities of one least squares instance.

    ``kappa2`` is the condition number of the normal matrix
    ``L^* L``, i.e. ``sigma_max^2 / sigma_min^2``. ``phi_JB_norm_sq`` and
    ``phi_B_norm_sq`` are truncated to ``|h|_inf <= truncation_radius``.
    """

    sigma_min_sq: float
    sigma_max_sq: float
    kappa2: float
    phi_JB_norm_sq: float
    phi_B_norm_sq: float
    sup_tail: float
    s_n: float
    nokings_bound: float
    truncation_radius: float
    size_J: int
    size_B: int


_DENSE_LIMIT = 10**7


def tail_weights(space: KorobovSpace, lat: Lattice, B: FrequencySet, radius: int) -> np.ndarray:
    """``w_rho = sum 1/r(h)`` over ``h`` not in ``B`` with ``|h|_inf <= radius``."""
    count = (2 * radius + 1) ** space.d
    if count > _DENSE_LIMIT:
        raise ValueError(f"truncation box with {count} indices exceeds the size guard")
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    H = np.stack(np.meshgrid(*([axis] * space.d), indexing="ij"), axis=-1).reshape(-1, space.d)
    inv = 1.0 / weight_r(space, H)
    w = np.bincount(residues_of(H, lat), weights=inv, minlength=lat.n)
    if len(B):
        inB = 1.0 / weight_r(space, B.indices)
        w -= np.bincount(residues_of(B.indices, lat), weights=inB, minlength=lat.n)
    return np.maximum(w, 0.0)


def diagnostics(op: LatticeOperator, space: KorobovSpace, truncation_radius: int,
                s_n: Optional[float] = None) -> DiagnosticsReport:
    """Singular values of ``L_{J,B}`` and truncated norms of ``Phi_{J,B}``.

    ``Phi_{J,B} Phi_{J,B}^*`` has entries ``dft(w)[(k - k') mod n]`` with
    ``w`` from :func:`tail_weights`; on the full lattice its largest
    eigenvalue is ``n max(w)``.
    """
    m, b = op.shape
    if m * b > _DENSE_LIMIT or m * m > _DENSE_LIMIT:
        raise ValueError("instance too large for dense diagnostics")
    sv = np.linalg.svd(op.dense(), compute_uv=False)
    smin, smax = float(sv.min() ** 2), float(sv.max() ** 2)
    w = tail_weights(space, op.lat, op.B, int(truncation_radius))
    col = dft(w)
    k = np.asarray(op.rows, dtype=np.int64)
    gram = col[(k[:, None] - k[None, :]) % op.n]
    phi_J = float(np.linalg.eigvalsh(gram).max())
    phi_B = float(op.n * w.max())
    sup_tail = 1.0 / complement_min_r(space, op.B)
    if s_n is None:
        s_n = s_n_kernel(space, op.lat)
    bound = op.n * (sup_tail + math.sqrt(s_n))
    return DiagnosticsReport(
        sigma_min_sq=smin, sigma_max_sq=smax,
        kappa2=smax / smin if smin > 0 else math.inf,
        phi_JB_norm_sq=phi_J, phi_B_norm_sq=phi_B, sup_tail=sup_tail, s_n=float(s_n),
        nokings_bound=bound, truncation_radius=float(truncation_radius), size_J=m, size_B=b)
