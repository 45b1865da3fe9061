"""Weighted Korobov spaces.

Weight schemes, the decay function ``r(h)``, the constants built from the
Riemann zeta function, and the reproducing kernel for integer smoothness.

The kernel of a space with integer smoothness ``alpha`` is

    K(x, y) = sum_u gamma_u prod_{j in u} eta_alpha(x_j, y_j),

where ``eta_alpha`` is a scaled Bernoulli polynomial of degree ``2 alpha``.
All array-valued functions accept a batch of points of shape ``(m, d)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special

PRODUCT = "product"
ORDER_DEPENDENT = "order"
POD = "pod"
SPOD = "spod"
KINDS = (PRODUCT, ORDER_DEPENDENT, POD, SPOD)

# long-double pi; numpy has no extended-precision constant
PI_LD = np.longdouble("3.141592653589793238462643383279502884")


def _positive_tuple(values, name):
    out = tuple(float(v) for v in values)
    for v in out:
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be strictly positive and finite, got {v}")
    return out


@dataclass(frozen=True)
class WeightScheme:
    """Weights ``gamma_u`` for subsets ``u`` of the coordinates.

    Use the constructors :meth:`product`, :meth:`unweighted`,
    :meth:`order_dependent`, :meth:`pod` and :meth:`spod` rather than the
    raw fields. ``order_weights[l]`` is ``Gamma_l`` for ``l = 0, 1, ...``;
    ``Gamma_0`` is ignored because ``gamma_emptyset = 1`` for every kind.
    ``spod_weights[j][nu - 1]`` is ``gamma_{j+1, nu}``.
    """

    kind: str
    product_weights: tuple = ()
    order_weights: tuple = ()
    spod_weights: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        _positive_tuple(self.product_weights, "product weights")
        _positive_tuple(self.order_weights, "order weights")
        for row in self.spod_weights:
            _positive_tuple(row, "SPOD weights")
        if self.kind in (PRODUCT, POD) and not self.product_weights:
            raise ValueError(f"{self.kind} weights need product_weights")
        if self.kind in (ORDER_DEPENDENT, POD, SPOD) and not self.order_weights:
            raise ValueError(f"{self.kind} weights need order_weights")
        if self.kind == SPOD and not self.spod_weights:
            raise ValueError("SPOD weights need spod_weights")

    # -- constructors -----------------------------------------------------
    @classmethod
    def product(cls, gammas: Iterable[float]) -> "WeightScheme":
        return cls(PRODUCT, product_weights=_positive_tuple(gammas, "product weights"))

    @classmethod
    def unweighted(cls, d: int) -> "WeightScheme":
        return cls.product([1.0] * d)

    @classmethod
    def order_dependent(cls, Gammas: Iterable[float]) -> "WeightScheme":
        return cls(ORDER_DEPENDENT, order_weights=_positive_tuple(Gammas, "order weights"))

    @classmethod
    def pod(cls, Gammas: Iterable[float], gammas: Iterable[float]) -> "WeightScheme":
        return cls(
            POD,
            product_weights=_positive_tuple(gammas, "product weights"),
            order_weights=_positive_tuple(Gammas, "order weights"),
        )

    @classmethod
    def spod(cls, Gammas: Iterable[float], table: Sequence[Sequence[float]]) -> "WeightScheme":
        return cls(
            SPOD,
            order_weights=_positive_tuple(Gammas, "order weights"),
            spod_weights=tuple(_positive_tuple(row, "SPOD weights") for row in table),
        )

    # -- helpers ----------------------------------------------------------
    def check_dimension(self, d: int, alpha: float) -> None:
        if self.kind in (PRODUCT, POD) and len(self.product_weights) < d:
            raise ValueError(f"need {d} product weights, got {len(self.product_weights)}")
        if self.kind in (ORDER_DEPENDENT, POD) and len(self.order_weights) < d + 1:
            raise ValueError(f"need order weights Gamma_0..Gamma_{d}")
        if self.kind == SPOD:
            if float(alpha) != int(alpha):
                raise ValueError("SPOD weights require integer alpha")
            a = int(alpha)
            if len(self.spod_weights) < d or any(len(r) < a for r in self.spod_weights[:d]):
                raise ValueError(f"need a {d} x {a} table of SPOD weights")
            if len(self.order_weights) < a * d + 1:
                raise ValueError(f"need order weights Gamma_0..Gamma_{a * d}")

    def order_weight(self, ell: int) -> float:
        return 1.0 if ell == 0 else self.order_weights[ell]


@dataclass(frozen=True)
class KorobovSpace:
    """Weighted Korobov space ``H_{d, alpha, gamma}``."""

    d: int
    alpha: float
    weights: WeightScheme
    _envelope: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension d must be a positive integer")
        if not self.alpha > 0.5:
            raise ValueError("smoothness alpha must exceed 1/2")
        self.weights.check_dimension(self.d, self.alpha)
        object.__setattr__(self, "_envelope", _envelope(self))

    @property
    def integer_alpha(self) -> bool:
        return float(self.alpha) == int(self.alpha)

    def require_kernel(self) -> int:
        """Return ``alpha`` as int, or raise if no closed-form kernel exists."""
        if not self.integer_alpha:
            raise ValueError("kernel operations need integer alpha")
        if self.weights.kind == SPOD:
            raise ValueError("kernel operations are not available for SPOD weights")
        if int(self.alpha) not in _BERNOULLI:
            raise ValueError(f"kernel supports alpha in {sorted(_BERNOULLI)}, got {self.alpha}")
        return int(self.alpha)

    def restrict(self, s: int) -> "KorobovSpace":
        """The space on the first ``s`` coordinates."""
        return KorobovSpace(s, self.alpha, self.weights)

    def coordinate_weights(self) -> np.ndarray:
        """``gamma_j`` for j = 1..d (ones for order-dependent weights)."""
        w = self.weights
        if w.kind in (PRODUCT, POD):
            return np.array(w.product_weights[: self.d])
        return np.ones(self.d)

    def order_weights(self) -> np.ndarray:
        """``Gamma_l`` for l = 0..d with ``Gamma_0 = 1`` (ones for product)."""
        w = self.weights
        if w.kind in (ORDER_DEPENDENT, POD):
            return np.array([w.order_weight(ell) for ell in range(self.d + 1)])
        return np.ones(self.d + 1)


def _envelope(space):
    """Coordinate and order weights bounding ``gamma_u`` from above.

    ``gamma_u <= G_{|u|} prod_{j in u} g_j`` holds with equality except for
    SPOD weights, where ``g_j = max_nu gamma_{j,nu}`` and ``G_l`` sums
    ``Gamma_{|nu|}`` over all ``nu in {1..alpha}^l``.
    """
    w = space.weights
    if w.kind != SPOD:
        return space.coordinate_weights(), space.order_weights()
    a = int(space.alpha)
    g = np.array([max(row[:a]) for row in w.spod_weights[: space.d]])
    # counts[l][t]: number of nu in {1..a}^l with |nu|_1 = t
    counts = np.zeros((space.d + 1, a * space.d + 1))
    counts[0, 0] = 1.0
    for ell in range(1, space.d + 1):
        for step in range(1, a + 1):
            counts[ell, step:] += counts[ell - 1, : a * space.d + 1 - step]
    Gam = np.array([w.order_weight(t) for t in range(a * space.d + 1)])
    G = counts @ Gam
    G[0] = 1.0
    return g, G


# ---------------------------------------------------------------------------
# weights and decay function


def support(h) -> frozenset:
    """1-based indices of the nonzero entries of ``h``."""
    return frozenset(int(j) + 1 for j in np.flatnonzero(np.asarray(h)))


def weight_gamma(space: KorobovSpace, u: Iterable[int]) -> float:
    """``gamma_u`` for a set of 1-based coordinates."""
    u = sorted(set(int(j) for j in u))
    if any(j < 1 or j > space.d for j in u):
        raise ValueError(f"coordinate set {u} is not a subset of 1..{space.d}")
    if not u:
        return 1.0
    w = space.weights
    if w.kind == PRODUCT:
        return float(np.prod([w.product_weights[j - 1] for j in u]))
    if w.kind == ORDER_DEPENDENT:
        return w.order_weight(len(u))
    if w.kind == POD:
        return w.order_weight(len(u)) * float(np.prod([w.product_weights[j - 1] for j in u]))
    return _spod_gamma(space, u)


def _spod_gamma(space, u):
    a = int(space.alpha)
    w = space.weights
    # poly[t] = sum over nu with |nu|_1 = t of prod gamma_{j, nu_j}
    poly = np.zeros(1)
    poly[0] = 1.0
    for j in u:
        row = w.spod_weights[j - 1]
        new = np.zeros(len(poly) + a)
        for nu in range(1, a + 1):
            new[nu : nu + len(poly)] += row[nu - 1] * poly
        poly = new
    return float(sum(w.order_weight(t) * c for t, c in enumerate(poly) if c))


def weight_r(space: KorobovSpace, h) -> np.ndarray | float:
    """``r(h) = gamma_{supp h}^{-1} prod_{j in supp h} |h_j|^{2 alpha}``.

    ``h`` may be a single index of length d or an array of shape (m, d).
    """
    H = np.asarray(h)
    single = H.ndim == 1
    H = np.atleast_2d(H)
    if H.shape[1] != space.d:
        raise ValueError(f"index length {H.shape[1]} does not match d={space.d}")
    A = np.abs(H).astype(float)
    nz = A > 0
    mag = np.prod(np.where(nz, A ** (2 * space.alpha), 1.0), axis=1)
    kind = space.weights.kind
    if kind == SPOD:
        gam = np.array([_spod_gamma(space, sorted(np.flatnonzero(row) + 1)) if row.any() else 1.0
                        for row in nz])
    else:
        g = space.coordinate_weights()
        G = space.order_weights()
        gam = np.prod(np.where(nz, g, 1.0), axis=1) * G[nz.sum(axis=1)]
    r = mag / gam
    return float(r[0]) if single else r


# ---------------------------------------------------------------------------
# constants


def zeta(s: float) -> float:
    """Riemann zeta function for real ``s > 1``."""
    if not s > 1:
        raise ValueError("zeta needs s > 1")
    return float(special.zeta(s))


def _zeta_ld(s: int) -> np.longdouble:
    # closed forms for the even arguments used with integer alpha
    table = {
        2: (1, 6), 4: (1, 90), 6: (1, 945), 8: (1, 9450), 10: (1, 93555),
        12: (691, 638512875),
    }
    num, den = table[s]
    return np.longdouble(num) * PI_LD**s / np.longdouble(den)


def _elementary_symmetric(a: np.ndarray) -> np.ndarray:
    """e_0..e_d of the entries of ``a`` (works for float and longdouble)."""
    e = np.zeros(len(a) + 1, dtype=a.dtype)
    e[0] = 1
    for x in a:
        e[1:] = e[1:] + x * e[:-1]
    return e


def _subset_sum(space, power, base, multiplicity=None):
    """sum_u m(|u|) gamma_u^power base^{|u|} by order-indexed recursion."""
    if space.weights.kind == SPOD:
        return _subset_sum_bruteforce(space, power, base, multiplicity)
    a = space.coordinate_weights() ** power * base
    e = _elementary_symmetric(a)
    G = space.order_weights() ** power
    ell = np.arange(space.d + 1)
    m = np.ones(space.d + 1) if multiplicity is None else multiplicity(ell)
    return float(np.sum(m * G * e))


def _subset_sum_bruteforce(space, power, base, multiplicity=None, max_d=20):
    if space.d > max_d:
        raise ValueError(f"subset enumeration limited to d <= {max_d}")
    total = 0.0
    for size in range(space.d + 1):
        m = 1.0 if multiplicity is None else float(multiplicity(np.array(size)))
        for u in itertools.combinations(range(1, space.d + 1), size):
            total += m * weight_gamma(space, u) ** power * base**size
    return total


def c_lambda(space: KorobovSpace, lam: float) -> float:
    """``C_lambda = sum_u max(1, |u|) gamma_u^lambda (2 zeta(2 alpha lambda))^{|u|}``."""
    if not (1 / (2 * space.alpha) < lam <= 1):
        raise ValueError(f"lambda must lie in (1/(2 alpha), 1], got {lam}")
    base = 2 * zeta(2 * space.alpha * lam)
    return _subset_sum(space, lam, base, lambda ell: np.maximum(1, ell))


def diag_sum(space: KorobovSpace) -> float:
    """``sum_h r(h)^{-2} = sum_u gamma_u^2 (2 zeta(4 alpha))^{|u|}``."""
    return _subset_sum(space, 2.0, 2 * zeta(4 * space.alpha))


def diag_sum_ld(space: KorobovSpace) -> np.longdouble:
    """:func:`diag_sum` in extended precision (integer alpha only)."""
    alpha = space.require_kernel()
    a = space.coordinate_weights().astype(np.longdouble) ** 2 * (2 * _zeta_ld(4 * alpha))
    e = _elementary_symmetric(a)
    G = space.order_weights().astype(np.longdouble) ** 2
    return np.sum(G * e)


# ---------------------------------------------------------------------------
# kernel

# Bernoulli polynomials B_2, B_4, B_6 as coefficient lists, highest degree first
_BERNOULLI = {
    1: (1, -1, (1, 6)),
    2: (1, -2, 1, 0, (-1, 30)),
    3: (1, -3, (5, 2), 0, (-1, 2), 0, (1, 42)),
}


def _bernoulli(alpha, t):
    acc = np.zeros_like(t)
    for c in _BERNOULLI[alpha]:
        c = t.dtype.type(c[0]) / t.dtype.type(c[1]) if isinstance(c, tuple) else t.dtype.type(c)
        acc = acc * t + c
    return acc


def _eta_scale(alpha, dtype):
    two_pi = 2 * PI_LD if dtype == np.longdouble else dtype.type(2 * np.pi)
    return two_pi ** (2 * alpha) / dtype.type((-1) ** (alpha + 1) * math.factorial(2 * alpha))


def kernel_eta(alpha: int, x, xp=0.0):
    """``eta_alpha(x, x') = sum_{h != 0} exp(2 pi i h (x - x')) / |h|^{2 alpha}``.

    Evaluated through the Bernoulli polynomial of degree ``2 alpha`` at
    ``(x - x') mod 1``. Extended-precision inputs stay extended.
    """
    if alpha not in _BERNOULLI:
        raise ValueError(f"eta is available for alpha in {sorted(_BERNOULLI)}")
    x = np.asarray(x)
    dtype = np.result_type(x.dtype, np.float64)
    t = np.mod(np.asarray(x, dtype=dtype) - np.asarray(xp, dtype=dtype), dtype.type(1))
    out = _eta_scale(alpha, np.dtype(dtype)) * _bernoulli(alpha, t)
    return out if out.ndim else out[()]


def kernel_at(space: KorobovSpace, x) -> np.ndarray:
    """``K(x, 0)`` for points ``x`` of shape (..., d); returns shape (...)."""
    alpha = space.require_kernel()
    X = np.asarray(x)
    if X.shape[-1] != space.d:
        raise ValueError(f"point dimension {X.shape[-1]} does not match d={space.d}")
    lead = X.shape[:-1]
    X = X.reshape(-1, space.d)
    dtype = np.result_type(X.dtype, np.float64)
    g = space.coordinate_weights().astype(dtype)
    if space.weights.kind == PRODUCT:
        K = np.ones(X.shape[0], dtype=dtype)
        for j in range(space.d):
            K *= 1 + g[j] * kernel_eta(alpha, X[:, j])
    else:
        # A[l] accumulates the order-l part of the subset sum
        A = np.zeros((space.d + 1, X.shape[0]), dtype=dtype)
        A[0] = 1
        for j in range(space.d):
            v = g[j] * kernel_eta(alpha, X[:, j])
            A[1 : j + 2] += v * A[: j + 1]
        K = space.order_weights().astype(dtype) @ A
    K = K.reshape(lead)
    return K if lead else K[()]


def kernel_K(space: KorobovSpace, x, y) -> np.ndarray:
    """Reproducing kernel ``K(x, y)``; broadcasts over leading point axes."""
    dtype = np.result_type(np.asarray(x).dtype, np.asarray(y).dtype, np.float64)
    diff = np.mod(np.asarray(x, dtype=dtype) - np.asarray(y, dtype=dtype), dtype.type(1))
    return kernel_at(space, diff)
