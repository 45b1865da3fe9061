"""Frequency index sets ``{h : r(h) <= M}`` and their cardinality bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .korobov import KorobovSpace, c_lambda, weight_gamma, weight_r
from .lattice import Lattice, residues_of

_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Indices ``h`` with ``r(h) <= M``.

    ``indices`` has shape (count, d) and is ordered by ``max_j |h_j|`` and
    then lexicographically. ``residues`` holds ``<h, z> mod n`` for one
    lattice once :func:`residues` has been applied.
    """

    indices: np.ndarray
    M: float
    residues: Optional[np.ndarray] = field(default=None)

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @property
    def d(self) -> int:
        return int(self.indices.shape[1])

    def position(self, h) -> int:
        """Row of ``h`` in :attr:`indices`, or -1 if absent."""
        hit = np.flatnonzero(np.all(self.indices == np.asarray(h, dtype=np.int64), axis=1))
        return int(hit[0]) if len(hit) else -1

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencySet):
            return NotImplemented
        same_res = (self.residues is None) == (other.residues is None) and (
            self.residues is None or np.array_equal(self.residues, other.residues))
        return (self.M == other.M and self.indices.shape == other.indices.shape
                and np.array_equal(self.indices, other.indices) and same_res)


def canonical_order(H: np.ndarray) -> np.ndarray:
    """Permutation sorting rows by max magnitude, then lexicographically."""
    H = np.asarray(H)
    if len(H) == 0:
        return np.zeros(0, dtype=np.int64)
    keys = [H[:, j] for j in range(H.shape[1] - 1, -1, -1)] + [np.abs(H).max(axis=1)]
    return np.lexsort(keys)


def _min_factor(space):
    """``mf[j][l] = min_m 1 / (best_j(m) * G_{l+m})`` for suffixes starting at j.

    ``best_j(m)`` is the product of the ``m`` largest coordinate weights among
    coordinates ``j..d-1``. A prefix with partial product ``P`` and ``l``
    active coordinates can be completed with ``r <= M`` only if
    ``P * mf[j][l] <= M``.
    """
    g, G = space._envelope
    d = space.d
    mf = np.empty((d + 1, d + 1))
    for j in range(d + 1):
        tail = np.sort(g[j:])[::-1]
        best = np.concatenate([[1.0], np.cumprod(tail)])
        for ell in range(d + 1):
            m = np.arange(min(len(best), d + 1 - ell))
            mf[j, ell] = np.min(1.0 / (best[m] * G[ell + m]))
    return mf


def enumerate_set(space: KorobovSpace, M: float) -> FrequencySet:
    """All ``h`` with ``r(h) <= M``, built one coordinate at a time.

    Prefixes are carried as a frontier of partial products; a prefix is
    extended only while some completion can still satisfy ``r <= M``. The
    pruning bound takes the best achievable weight of the remaining
    coordinates, so it stays exact for weights that are not monotone in the
    support.
    """
    if not M > 0:
        raise ValueError("radius M must be positive")
    d, two_a = space.d, 2 * space.alpha
    g, _ = space._envelope
    mf = _min_factor(space)
    limit = M * (1 + _SLACK)

    H = np.zeros((1, 0), dtype=np.int64)
    P = np.ones(1)
    ell = np.zeros(1, dtype=np.int64)
    if P[0] * mf[0, 0] > limit:
        return FrequencySet(np.zeros((0, d), dtype=np.int64), float(M))
    for j in range(d):
        # zero in coordinate j: feasible if the suffix j+1.. can still finish
        keep0 = P * mf[j + 1, ell] <= limit
        # nonzero: |h|^{2a} / g_j * P * mf[j+1, l+1] <= M
        cap = limit * g[j] / (P * mf[j + 1, np.minimum(ell + 1, d)])
        hmax = np.floor(cap ** (1 / two_a) * (1 + _SLACK)).astype(np.int64)
        hmax = np.where(ell < d, np.maximum(hmax, 0), 0)
        parts_H, parts_P, parts_l = [], [], []
        if keep0.any():
            parts_H.append(np.column_stack([H[keep0], np.zeros(keep0.sum(), dtype=np.int64)]))
            parts_P.append(P[keep0])
            parts_l.append(ell[keep0])
        total = int(hmax.sum())
        if total:
            src = np.repeat(np.arange(len(P)), hmax)
            starts = np.cumsum(hmax) - hmax
            mag = np.arange(total) - np.repeat(starts, hmax) + 1
            newP = P[src] * mag.astype(float) ** two_a / g[j]
            for sign in (-1, 1):
                parts_H.append(np.column_stack([H[src], sign * mag]))
                parts_P.append(newP)
                parts_l.append(ell[src] + 1)
        if not parts_H:
            return FrequencySet(np.zeros((0, d), dtype=np.int64), float(M))
        H = np.concatenate(parts_H)
        P = np.concatenate(parts_P)
        ell = np.concatenate(parts_l)
    H = H[weight_r(space, H) <= M]
    return FrequencySet(H[canonical_order(H)], float(M))


def enumerate_bruteforce(space: KorobovSpace, M: float, box: Optional[int] = None) -> FrequencySet:
    """Reference enumeration by scanning the box ``|h|_inf <= box``."""
    if box is None:
        gmax = max(weight_gamma(space, u) for u in _subsets(space.d))
        box = math.ceil((M * gmax) ** (1 / (2 * space.alpha)))
    axis = np.arange(-box, box + 1, dtype=np.int64)
    H = np.stack(np.meshgrid(*([axis] * space.d), indexing="ij"), axis=-1).reshape(-1, space.d)
    H = H[weight_r(space, H) <= M]
    return FrequencySet(H[canonical_order(H)], float(M))


def _subsets(d):
    for mask in range(1, 2**d):
        yield [j + 1 for j in range(d) if mask >> j & 1]


def complement_min_r(space: KorobovSpace, B: FrequencySet) -> float:
    """``min_{h not in B} r(h)`` for a set of the form ``{r <= M}``."""
    radius = max(B.M, 1.0)
    for _ in range(200):
        radius *= 2
        big = enumerate_set(space, radius)
        if len(big) > len(B):
            r = weight_r(space, big.indices)
            return float(r[r > B.M].min())
    raise RuntimeError("no index outside the set found")


def cardinality_bounds(space: KorobovSpace, M: float, lam: float) -> tuple:
    """``((gamma_1 M)^{1/(2 alpha)}, C_lambda M^lambda)`` bracketing ``|{r <= M}|``."""
    _check_open_lambda(space, lam)
    if M < 1:
        raise ValueError("cardinality bounds need M >= 1")
    lower = (weight_gamma(space, {1}) * M) ** (1 / (2 * space.alpha))
    upper = c_lambda(space, lam) * M**lam
    return lower, upper


def tail_bound(space: KorobovSpace, M: float, lam: float) -> float:
    """Upper bound on ``|B|^{-1} sum_{h not in B} 1/r(h)`` for ``B = {r <= M}``.

    Returns ``C^{1/lam} / gamma_1^{1/(2 alpha lam)} * lam / (1 - lam) * M^{-1/(2 alpha lam)}``.
    """
    _check_open_lambda(space, lam)
    if M < 1:
        raise ValueError("tail bound needs M >= 1")
    a = space.alpha
    const = c_lambda(space, lam) ** (1 / lam) / weight_gamma(space, {1}) ** (1 / (2 * a * lam))
    return const * lam / (1 - lam) * M ** (-1 / (2 * a * lam))


def _check_open_lambda(space, lam):
    if not (1 / (2 * space.alpha) < lam < 1):
        raise ValueError(f"lambda must lie in the open interval (1/(2 alpha), 1), got {lam}")


def residues(B: FrequencySet, lat: Lattice) -> FrequencySet:
    """Copy of ``B`` with ``residues[i] = <h_i, z> mod n``."""
    if B.d != lat.d and len(B):
        raise ValueError("frequency set and lattice dimensions differ")
    rho = residues_of(B.indices, lat) if len(B) else np.zeros(0, dtype=np.int64)
    return replace(B, residues=rho)


def reconstruction_report(space: KorobovSpace, lat: Lattice, s_n_value: float) -> dict:
    """Compare the guaranteed radius ``1/(2 sqrt S_n)`` with ``1/sqrt S_n``.

    Only the smaller radius is guaranteed to give a reconstructing set; the
    report records whether the larger one happens to reconstruct as well.
    """
    from .lattice import classical_radius, is_reconstructing, reconstructing_radius

    out = {}
    for name, M in (("guaranteed", reconstructing_radius(s_n_value)),
                    ("classical", classical_radius(s_n_value))):
        B = enumerate_set(space, M)
        ok, witness = is_reconstructing(lat, B)
        out[name] = {"M": M, "size": len(B), "reconstructing": ok, "witness": witness}
    return out
