"""Rank-1 lattices, the quality measure ``S_n(z)`` and CBC construction."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft

from .korobov import (
    KorobovSpace,
    c_lambda,
    diag_sum,
    diag_sum_ld,
    kernel_at,
    kernel_eta,
    weight_gamma,
    weight_r,
    zeta,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Lattice:
    """Rank-1 lattice ``{k z / n mod 1 : k = 0..n-1}``."""

    n: int
    z: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("lattice size must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "z", tuple(int(c) % n for c in self.z))

    @property
    def d(self) -> int:
        return len(self.z)

    def points(self, k=None, dtype=np.float64) -> np.ndarray:
        return lattice_points(self, k, dtype)


def lattice_points(lat: Lattice, k=None, dtype=np.float64) -> np.ndarray:
    """Points ``(k z / n) mod 1``, shape (len(k), d); all ``k`` by default.

    Numerators are reduced in integer arithmetic, so the coordinates are the
    correctly rounded fractions ``m / n``.
    """
    k = np.arange(lat.n, dtype=np.int64) if k is None else np.asarray(k, dtype=np.int64)
    z = np.asarray(lat.z, dtype=np.int64)
    num = (k[:, None] % lat.n) * z[None, :] % lat.n
    return num.astype(dtype) / dtype(lat.n)


def totient(n: int) -> int:
    """Euler's totient by trial-division factorization."""
    if n < 1:
        raise ValueError("totient needs n >= 1")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    p = 3
    while p * p <= n:
        if n % p == 0:
            return False
        p += 2
    return True


def next_prime(m: int) -> int:
    """Smallest prime strictly greater than ``m``."""
    n = m + 1
    while not is_prime(n):
        n += 1
    return n


def primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group modulo a prime ``p``."""
    if p == 2:
        return 1
    factors, m, q = [], p - 1, 2
    while q * q <= m:
        if m % q == 0:
            factors.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1:
        factors.append(m)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise ArithmeticError(f"no primitive root for {p}")


# ---------------------------------------------------------------------------
# S_n(z)


def s_n_kernel(space: KorobovSpace, lat: Lattice, raw: bool = False) -> float:
    """``S_n(z)`` through the kernel: ``mean_k K(x_k, 0)^2 - sum_h r(h)^{-2}``.

    Both terms are O(1) while ``S_n`` can be tiny, so the subtraction is
    carried out in extended precision. Negative round-off is clamped to zero
    with a warning when it exceeds ``1e-8 * diag_sum``.
    """
    if lat.d != space.d:
        raise ValueError("lattice and space dimensions differ")
    space.require_kernel()
    c = kernel_at(space, lattice_points(lat, dtype=np.longdouble))
    value = np.mean(c * c) - diag_sum_ld(space)
    if raw:
        return float(value)
    if value < 0:
        if value < -1e-8 * diag_sum(space):
            warnings.warn(f"S_n evaluated to {float(value):.3e}; clamped to 0", RuntimeWarning)
        return 0.0
    return float(value)


def s_n_bruteforce(space: KorobovSpace, lat: Lattice, radius: int,
                   extrapolate: bool = False) -> float:
    """Truncated double sum defining ``S_n(z)``.

    Sums ``1 / (r(h) r(h + l))`` over nonzero dual-lattice vectors ``l`` with
    both ``h`` and ``h + l`` in the box ``|.|_inf <= radius``. Pairs sharing a
    residue class are collected as ``w_rho^2 - q_rho`` with ``w`` and ``q``
    the per-class sums of ``1/r`` and ``1/r^2``.

    The truncation error decays only like ``1/radius``. With
    ``extrapolate=True`` the sums at ``radius // 2`` and ``radius`` are
    combined by one Richardson step, ``(R S(R) - R' S(R')) / (R - R')`` with
    ``R' = R // 2``, which removes the leading term.
    """
    if lat.d != space.d:
        raise ValueError("lattice and space dimensions differ")
    if radius < 1:
        return 0.0
    if extrapolate and radius >= 2:
        half = radius // 2
        big, small = _box_sum(space, lat, radius), _box_sum(space, lat, half)
        return (radius * big - half * small) / (radius - half)
    return _box_sum(space, lat, radius)


def _box_sum(space, lat, radius):
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    H = np.stack(np.meshgrid(*([axis] * space.d), indexing="ij"), axis=-1).reshape(-1, space.d)
    inv = 1.0 / weight_r(space, H)
    rho = H % lat.n @ np.asarray(lat.z, dtype=np.int64) % lat.n
    w = np.bincount(rho, weights=inv, minlength=lat.n)
    q = np.bincount(rho, weights=inv * inv, minlength=lat.n)
    return float(math.fsum(w * w - q))


# ---------------------------------------------------------------------------
# CBC construction


def _sweep(a: np.ndarray, f: np.ndarray, n: int, candidates: np.ndarray) -> np.ndarray:
    """``sum_k a_k f[(k c) mod n]`` for every candidate ``c``.

    For prime ``n`` the nonzero residues are reordered along powers of a
    primitive root, turning the sweep into a cyclic correlation of length
    ``n - 1`` evaluated by FFT. Other ``n`` use direct summation.
    """
    out = np.full(len(candidates), a[0] * f[0])
    if n <= 2:
        for i, c in enumerate(candidates):
            out[i] = np.dot(a, f[np.arange(n) * c % n])
        return out
    if is_prime(n):
        g = primitive_root(n)
        perm = np.empty(n - 1, dtype=np.int64)
        perm[0] = 1
        for i in range(1, n - 1):
            perm[i] = perm[i - 1] * g % n
        corr = scipy.fft.irfft(np.conj(scipy.fft.rfft(a[perm])) * scipy.fft.rfft(f[perm]), n - 1)
        log_index = np.empty(n, dtype=np.int64)
        log_index[perm] = np.arange(n - 1)
        return out + corr[log_index[candidates]]
    k = np.arange(n, dtype=np.int64)
    chunk = max(1, 2_000_000 // n)
    for start in range(0, len(candidates), chunk):
        cs = candidates[start : start + chunk]
        out[start : start + chunk] = f[np.outer(cs, k) % n] @ a
    return out


def _eta_column(alpha, n, c, dtype):
    """``eta_alpha(k c / n)`` for k = 0..n-1 with exact residues."""
    k = np.arange(n, dtype=np.int64)
    return kernel_eta(alpha, (k * int(c) % n).astype(dtype) / dtype(n))


def cbc_construct(space: KorobovSpace, n: int, d: Optional[int] = None,
                  refine: int = 8) -> Lattice:
    """Component-by-component construction minimizing ``S_n``.

    ``z_1 = 1``; each further component is the candidate ``c`` coprime to
    ``n`` minimizing ``S_n`` of the partial vector on the corresponding
    restriction of the space, smallest ``c`` winning ties. Because ``c`` and
    ``n - c`` always give the same value, only ``c <= n/2`` is searched.

    With per-order accumulators ``A_l`` of the kernel on the accepted
    coordinates, the kernel after appending ``c`` is ``U + g eta(k c/n) V``
    where ``U = sum_l Gamma_l A_l`` and ``V = sum_l Gamma_{l+1} A_l``. The
    candidate sweep is an FFT correlation for prime ``n``; the ``refine``
    best candidates are rescored in extended precision before the argmin is
    taken.
    """
    d = space.d if d is None else d
    if d > space.d:
        raise ValueError(f"space has only {space.d} coordinates")
    if n < 2:
        raise ValueError("CBC needs n >= 2")
    alpha = space.require_kernel()
    space = space.restrict(d) if d < space.d else space
    ld = np.longdouble
    Gam = space.order_weights().astype(ld)
    g = space.coordinate_weights().astype(ld)

    candidates = np.array([c for c in range(1, n // 2 + 1) if math.gcd(c, n) == 1], dtype=np.int64)
    eta_table = kernel_eta(alpha, np.arange(n) / n)

    z = [1]
    A = np.zeros((d + 1, n), dtype=ld)
    A[0] = 1
    A[1] = g[0] * _eta_column(alpha, n, 1, ld)
    for s in range(2, d + 1):
        ell = np.arange(s)
        U = Gam[ell] @ A[:s]
        V = Gam[ell + 1] @ A[:s]
        gs = float(g[s - 1])
        U64, V64 = U.astype(float), V.astype(float)
        scores = (2 * gs * _sweep(U64 * V64, eta_table, n, candidates)
                  + gs**2 * _sweep(V64 * V64, eta_table**2, n, candidates))
        top = candidates[np.argsort(scores, kind="stable")[: max(1, refine)]]
        exact = np.array([np.mean((U + g[s - 1] * _eta_column(alpha, n, c, ld) * V) ** 2)
                          for c in top])
        best = exact.min()
        tol = 64 * np.finfo(ld).eps * abs(best)
        c = int(top[exact <= best + tol].min())
        z.append(c)
        A[1 : s + 1] += g[s - 1] * _eta_column(alpha, n, c, ld) * A[:s]
    lat = Lattice(n, tuple(z))
    bound = skorobov_bounds(space, n, 1.0).upper
    value = s_n_kernel(space, lat)
    if value > bound:
        warnings.warn(f"CBC lattice S_n={value:.3e} exceeds the upper bound {bound:.3e}")
    log.debug("cbc n=%d z=%s S_n=%.3e", n, z, value)
    return lat


# ---------------------------------------------------------------------------
# bounds and reconstruction


@dataclass(frozen=True)
class SkorobovBounds:
    lower: float
    upper: float
    lam: float
    tau_lambda: float


def skorobov_bounds(space: KorobovSpace, n: int, lam: float = 1.0) -> SkorobovBounds:
    """Lower and CBC upper bounds on ``S_n(z)`` at exponent ``lam``."""
    if not (1 / (2 * space.alpha) < lam <= 1):
        raise ValueError(f"lambda must lie in (1/(2 alpha), 1], got {lam}")
    a = space.alpha
    lower = 2 * zeta(2 * a) * weight_gamma(space, {1}) / n ** (2 * a)
    tau = 2.0 ** (4 * a * lam + 1) + 1
    upper = (tau * c_lambda(space, lam) ** 2 / totient(n)) ** (1 / lam)
    return SkorobovBounds(lower, upper, lam, tau)


def s_n_upper_estimate(space: KorobovSpace, n: int, grid: int = 64) -> float:
    """Smallest CBC upper bound over a grid of admissible exponents."""
    lo = 1 / (2 * space.alpha)
    lams = lo + (1 - lo) * np.arange(1, grid + 1) / grid
    return min(skorobov_bounds(space, n, float(lam)).upper for lam in lams)


def is_reconstructing(lat: Lattice, B) -> tuple:
    """Whether all residues ``<h, z> mod n`` over ``B`` are distinct.

    Returns ``(True, None)`` or ``(False, (h, h'))`` with a colliding pair.
    ``B`` is a :class:`FrequencySet` or an integer array of shape (m, d).
    """
    H = np.asarray(getattr(B, "indices", B), dtype=np.int64)
    if len(H) == 0:
        return True, None
    rho = residues_of(H, lat)
    order = np.argsort(rho, kind="stable")
    dup = np.flatnonzero(rho[order][1:] == rho[order][:-1])
    if len(dup) == 0:
        return True, None
    i, j = order[dup[0]], order[dup[0] + 1]
    return False, (tuple(int(v) for v in H[i]), tuple(int(v) for v in H[j]))


_H_LIMIT = 2**20
_N_LIMIT = 2**31


def residues_of(H, lat: Lattice) -> np.ndarray:
    """``<h, z> mod n`` for the rows of ``H`` in exact integer arithmetic."""
    H = np.atleast_2d(np.asarray(H, dtype=np.int64))
    if H.shape[1] != lat.d:
        raise ValueError("index dimension does not match the lattice")
    if lat.n > _N_LIMIT or (H.size and np.abs(H).max() > _H_LIMIT):
        raise OverflowError("indices or lattice size outside the exact-arithmetic range")
    acc = np.zeros(H.shape[0], dtype=np.int64)
    for j, zj in enumerate(lat.z):
        acc = (acc + (H[:, j] % lat.n) * zj) % lat.n
    return acc


def reconstructing_radius(s_n_value: float) -> float:
    """Radius ``1 / (2 sqrt(S_n))`` of a guaranteed reconstructing set."""
    if not s_n_value > 0:
        raise ValueError("S_n must be positive")
    return 1.0 / (2.0 * math.sqrt(s_n_value))


def reconstructing_radius_from_error(e: float) -> float:
    """Radius ``e^{-2}``: ``r(h) < e^{-2}`` reconstructs for worst-case error ``e``."""
    if not e > 0:
        raise ValueError("worst-case error must be positive")
    return e**-2.0


def classical_radius(s_n_value: float) -> float:
    """Radius ``1 / sqrt(S_n)`` minimizing the classical error bound."""
    if not s_n_value > 0:
        raise ValueError("S_n must be positive")
    return 1.0 / math.sqrt(s_n_value)
