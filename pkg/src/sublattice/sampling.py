"""Random multiset subsampling of lattice indices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

FULL = "full"
THEORY = "theory"
PRACTICE = "practice"
PRACTICE_SQRT = "practice-sqrt"
MODES = (FULL, THEORY, PRACTICE, PRACTICE_SQRT)


@dataclass(frozen=True)
class SubsamplePlan:
    """How many lattice indices to draw and from which seed.

    ``practice`` uses ``ceil(sqrt(n) ln n)``; ``practice-sqrt`` is the
    smaller variant ``ceil(sqrt(n) ln sqrt(n))``.
    """

    mode: str = PRACTICE
    t: float = 4.0
    seed: int = 0
    size_override: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown subsampling mode {self.mode!r}")
        if self.mode == THEORY and self.t < 4:
            raise ValueError("theory sizing needs t >= 4")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.size_override is not None and self.size_override < 1:
            raise ValueError("size override must be positive")

    def size(self, n: int, B_size: int = 1) -> int:
        if self.size_override is not None:
            return int(self.size_override)
        if self.mode == FULL:
            return n
        if self.mode == THEORY:
            m = plan_size_theory(B_size, self.t)
            if m > n:
                warnings.warn(f"theory size {m} exceeds n={n}; capped at n")
                return n
            return m
        if self.mode == PRACTICE:
            return plan_size_practice(n)
        return plan_size_practice_sqrt(n)


@dataclass(frozen=True, eq=False)
class SubsampleIndex:
    """Sorted multiset ``J`` of lattice indices; repeats are kept."""

    entries: np.ndarray
    n: int
    plan: SubsamplePlan

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        if e.ndim != 1 or len(e) == 0:
            raise ValueError("a subsample needs at least one entry")
        if e.min() < 0 or e.max() >= self.n:
            raise ValueError("subsample entries out of range")
        object.__setattr__(self, "entries", np.sort(e))

    def __len__(self) -> int:
        return len(self.entries)

    def unique(self) -> np.ndarray:
        return np.unique(self.entries)

    def __eq__(self, other):
        if not isinstance(other, SubsampleIndex):
            return NotImplemented
        return self.n == other.n and self.plan == other.plan and np.array_equal(
            self.entries, other.entries)


def plan_size_theory(B_size: int, t: float) -> int:
    """``ceil(12 |B| (ln |B| + t))`` samples for the concentration bounds."""
    if B_size < 1:
        raise ValueError("B_size must be positive")
    if t < 4:
        raise ValueError("t must be at least 4")
    return math.ceil(12 * B_size * (math.log(B_size) + t))


def plan_size_practice(n: int) -> int:
    """``ceil(sqrt(n) ln n)``, capped at ``n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return min(n, math.ceil(math.sqrt(n) * math.log(n)))


def plan_size_practice_sqrt(n: int) -> int:
    """``ceil(sqrt(n) ln sqrt(n))``, capped at ``n``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return min(n, max(1, math.ceil(math.sqrt(n) * math.log(math.sqrt(n)))))


def generator(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def draw(plan: SubsamplePlan, n: int, B_size: int = 1) -> SubsampleIndex:
    """Draw ``J`` according to ``plan``: uniform i.i.d. with replacement."""
    if n < 1:
        raise ValueError("n must be positive")
    if plan.mode == FULL and plan.size_override is None:
        return SubsampleIndex(np.arange(n, dtype=np.int64), n, plan)
    m = plan.size(n, B_size)
    if m < 1:
        raise ValueError("planned subsample size is zero")
    entries = generator(plan.seed).integers(0, n, size=m, dtype=np.int64)
    return SubsampleIndex(entries, n, plan)


def jb_sandwich_check(B_size, J_size, t):
    """Whether ``6 (ln J + t) / J <= 1 / B <= 13 (ln J + t) / J``.

    Accepts scalars or broadcastable arrays.
    """
    B = np.asarray(B_size, dtype=float)
    J = np.asarray(J_size, dtype=float)
    q = (np.log(J) + t) / J
    ok = (6 * q <= 1 / B) & (1 / B <= 13 * q)
    return bool(ok) if ok.ndim == 0 else ok
