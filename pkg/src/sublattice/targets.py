"""Benchmark target functions on the torus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_KINK_SCALE = 5 ** 0.75 * 15 / (4 * math.sqrt(3))


def kink(x) -> np.ndarray:
    """``c^d prod_j max(0, 1/5 - (x_j - 1/2)^2)`` with ``c = 5^{3/4} 15 / (4 sqrt 3)``.

    The constant normalizes the L2 norm to one. ``x`` has shape (m, d) or
    (d,).
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    d = X.shape[1]
    out = _KINK_SCALE**d * np.prod(np.maximum(0.0, 0.2 - (X - 0.5) ** 2), axis=1)
    return out[0] if single else out


@dataclass(frozen=True)
class Reciprocal:
    """``1 / (1 + 0.5 sum_j j^{-q} sin(2 pi x_j))`` in ``d`` variables."""

    d: int
    q: float

    def __post_init__(self):
        if self.q <= 1:
            raise ValueError("decay parameter q must exceed 1")
        # the denominator is smallest when every sine equals -1
        if 1 - 0.5 * float(np.sum(np.arange(1, self.d + 1, dtype=float) ** -self.q)) <= 0:
            raise ValueError("denominator is not positive on the torus")

    def __call__(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}")
        decay = np.arange(1, self.d + 1, dtype=float) ** -self.q
        out = 1.0 / (1.0 + 0.5 * (np.sin(2 * np.pi * X) @ decay))
        return out[0] if single else out


def reciprocal(d: int, q: float, x) -> np.ndarray:
    return Reciprocal(d, q)(x)


def make_target(name: str, d: int, q: float = 6.0):
    """Callable target by name: ``kink`` or ``reciprocal``."""
    if name == "kink":
        return kink
    if name == "reciprocal":
        return Reciprocal(d, q)
    raise ValueError(f"unknown target {name!r}")
