import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublattice.freqsets import (
    FrequencySet,
    canonical_order,
    cardinality_bounds,
    complement_min_r,
    enumerate_bruteforce,
    enumerate_set,
    reconstruction_report,
    residues,
    tail_bound,
)
from sublattice.korobov import KorobovSpace, WeightScheme, c_lambda, weight_r
from sublattice.lattice import Lattice, cbc_construct, s_n_kernel

W = WeightScheme
FACT = [math.factorial(k) for k in range(12)]

SPACES = [
    KorobovSpace(1, 1, W.unweighted(1)),
    KorobovSpace(2, 1, W.unweighted(2)),
    KorobovSpace(2, 1, W.product([0.5, 0.5])),
    KorobovSpace(3, 1, W.product([1.0, 0.5, 0.2])),
    KorobovSpace(3, 2, W.unweighted(3)),
    KorobovSpace(3, 1.5, W.product([0.9, 0.6, 0.3])),
    KorobovSpace(3, 1, W.pod(FACT[:4], [1.0, 2**-6, 3**-6])),
    KorobovSpace(3, 1, W.pod(FACT[:4], [1.0, 0.5, 0.33])),
    KorobovSpace(3, 1, W.order_dependent([1, 0.3, 0.9, 0.05])),
    KorobovSpace(2, 1, W.spod([1, 1, 2, 6, 24], [[0.5, 0.3], [0.4, 0.1]])),
]


def as_set(B):
    return {tuple(int(v) for v in h) for h in B.indices}


# -- enumeration -----------------------------------------------------------


def test_enumerate_examples():
    one = enumerate_set(KorobovSpace(1, 1, W.unweighted(1)), 9)
    assert one.indices[:, 0].tolist() == [0, -1, 1, -2, 2, -3, 3]
    assert as_set(enumerate_set(KorobovSpace(3, 1, W.product([0.5] * 3)), 1)) == {(0, 0, 0)}


def test_enumerate_unweighted_two_dim_radius_four():
    # (1, 2) has r = 1 * 4 = 4 and belongs to the set together with its
    # sign and coordinate variants, giving 21 indices rather than 13
    B = enumerate_set(KorobovSpace(2, 1, W.unweighted(2)), 4)
    expected = {(h1, h2) for h1 in range(-4, 5) for h2 in range(-4, 5)
                if max(1, h1 * h1) * max(1, h2 * h2) <= 4}
    assert as_set(B) == expected
    assert len(B) == 21
    assert {(1, 2), (-2, 1)} <= as_set(B)


@pytest.mark.parametrize("space", SPACES)
@pytest.mark.parametrize("M", [1, 3.5, 17, 120, 500])
def test_enumerate_matches_bruteforce(space, M):
    fast = enumerate_set(space, M)
    assert fast == enumerate_bruteforce(space, M)
    box = math.ceil(M ** (1 / (2 * space.alpha)) * 3)
    assert as_set(fast) == as_set(enumerate_bruteforce(space, M, box=box))


@pytest.mark.parametrize("space", SPACES)
def test_enumerate_boundary_included(space):
    B = enumerate_set(space, 50)
    r = weight_r(space, B.indices)
    assert (r <= 50).all()
    exact = float(np.max(r))
    assert len(enumerate_set(space, exact)) == len(enumerate_set(space, exact * (1 + 1e-12)))
    assert len(enumerate_set(space, exact * (1 - 1e-9))) < len(enumerate_set(space, exact))


def test_enumerate_rejects_nonpositive_radius_and_allows_empty():
    space = KorobovSpace(2, 1, W.product([0.5, 0.5]))
    with pytest.raises(ValueError):
        enumerate_set(space, 0)
    # the origin has r = 1 > 0.5
    empty = enumerate_set(space, 0.5)
    assert len(empty) == 0 and empty.d == 2


def test_order_is_canonical_and_deterministic():
    B = enumerate_set(KorobovSpace(3, 1, W.unweighted(3)), 30)
    rows = [tuple(h) for h in B.indices]
    assert rows == sorted(rows, key=lambda h: (max(abs(v) for v in h), h))
    perm = np.random.default_rng(0).permutation(len(B))
    assert np.array_equal(B.indices[perm][canonical_order(B.indices[perm])], B.indices)


# weights with gamma_u >= gamma_v whenever u is a subset of v
MONOTONE = [s for s in SPACES if s.weights.kind in ("product", "unweighted")]


@pytest.mark.parametrize("space", MONOTONE + [KorobovSpace(3, 1, W.order_dependent([1, 0.5, 0.2, 0.1]))])
def test_downward_closed(space):
    B = enumerate_set(space, 200)
    members = as_set(B)
    rng = np.random.default_rng(3)
    for i in rng.integers(0, len(B), 200):
        h = B.indices[i]
        shrink = np.array([rng.integers(0, abs(v) + 1) for v in h]) * np.sign(h)
        assert tuple(int(v) for v in shrink) in members


def test_non_monotone_weights_break_downward_closure():
    # POD: gamma_{2} = 2^-6 < gamma_{1,2} = 2^-5
    B = enumerate_set(KorobovSpace(2, 1, W.pod(FACT[:3], [1.0, 2**-6])), 40)
    members = as_set(B)
    assert (1, 1) in members and (0, 1) not in members
    assert all((-a, b) in members and (a, -b) in members for a, b in members)
    # order-dependent weights growing with the order
    C = as_set(enumerate_set(KorobovSpace(2, 1, W.order_dependent([1, 0.1, 0.9])), 12))
    assert (1, 3) in C and (0, 3) not in C


@settings(max_examples=25, deadline=None)
@given(st.floats(1, 400), st.integers(0, len(SPACES) - 1))
def test_enumerate_property_against_bruteforce(M, i):
    assert enumerate_set(SPACES[i], M) == enumerate_bruteforce(SPACES[i], M)


def test_large_dimension_enumeration_consistent():
    space = KorobovSpace(30, 1, W.pod([math.factorial(k) for k in range(31)], [j**-6.0 for j in range(1, 31)]))
    B = enumerate_set(space, 2000)
    assert (weight_r(space, B.indices) <= 2000).all()
    low = space.restrict(3)
    head = B.indices[np.all(B.indices[:, 3:] == 0, axis=1)][:, :3]
    assert as_set(FrequencySet(head, 2000)) == as_set(enumerate_bruteforce(low, 2000))


def test_position_lookup():
    B = enumerate_set(KorobovSpace(2, 1, W.unweighted(2)), 10)
    assert B.position((0, 0)) == 0
    assert np.array_equal(B.indices[B.position((2, -1))], [2, -1])
    assert B.position((7, 7)) == -1


# -- bounds ----------------------------------------------------------------


def test_cardinality_examples():
    space = KorobovSpace(1, 1, W.unweighted(1))
    assert cardinality_bounds(space, 16, 0.8)[0] == pytest.approx(4)
    lo, hi = cardinality_bounds(space, 1, 0.7)
    assert lo == pytest.approx(1) and lo <= hi == pytest.approx(c_lambda(space, 0.7))
    lo, hi = cardinality_bounds(space, 9, 0.9)
    assert lo == pytest.approx(3) and lo <= len(enumerate_set(space, 9)) == 7 <= hi


@pytest.mark.parametrize("space", SPACES[:7])
@pytest.mark.parametrize("M", [1, 10, 100, 1000])
def test_cardinality_bracket_over_lambda_grid(space, M):
    size = len(enumerate_set(space, M))
    a = space.alpha
    for lam in np.linspace(1 / (2 * a), 1, 12)[1:-1]:
        lo, hi = cardinality_bounds(space, M, lam)
        assert lo <= size <= hi


def test_bounds_reject_closed_endpoints():
    space = KorobovSpace(1, 1, W.unweighted(1))
    for lam in (0.5, 1.0, 0.4):
        with pytest.raises(ValueError):
            cardinality_bounds(space, 4, lam)
        with pytest.raises(ValueError):
            tail_bound(space, 4, lam)
    with pytest.raises(ValueError):
        tail_bound(space, 0.5, 0.7)


def test_tail_bound_dominates_truncated_tail():
    space = KorobovSpace(1, 1, W.unweighted(1))
    B = enumerate_set(space, 100)
    h = np.arange(11, 10**5 + 1, dtype=float)
    tail = 2 * np.sum(1 / h**2) / len(B)
    assert len(B) == 21
    assert tail_bound(space, 100, 0.75) >= tail > 0


@pytest.mark.parametrize("space", SPACES[:3])
def test_tail_bound_dominates_in_two_dims(space):
    M = 20
    B = enumerate_set(space, M)
    R = 400
    axis = np.arange(-R, R + 1)
    H = np.stack(np.meshgrid(*([axis] * space.d), indexing="ij"), -1).reshape(-1, space.d)
    r = weight_r(space, H)
    tail = np.sum(1 / r[r > M]) / len(B)
    for lam in (0.6, 0.8, 0.95):
        assert tail_bound(space, M, lam) >= tail


def test_tail_bound_power_law():
    space = KorobovSpace(2, 1, W.product([0.5, 0.5]))
    lam = 0.8
    ratio = tail_bound(space, 200, lam) / tail_bound(space, 100, lam)
    assert ratio == pytest.approx(2 ** (-1 / (2 * lam)), rel=1e-13)


def test_complement_min_r():
    space = KorobovSpace(2, 1, W.unweighted(2))
    assert complement_min_r(space, enumerate_set(space, 4)) == 9
    assert complement_min_r(space, enumerate_set(space, 0.5)) == 1


# -- residues --------------------------------------------------------------


def test_residue_examples():
    lat = Lattice(55, (1, 21))
    B = residues(FrequencySet(np.array([[0, 0], [2, 1], [57, 1]]), 100.0), lat)
    assert B.residues.tolist() == [0, 23, 23]


def test_residues_independent_of_order():
    space = KorobovSpace(3, 1, W.unweighted(3))
    lat = Lattice(127, (1, 19, 45))
    B = residues(enumerate_set(space, 40), lat)
    perm = np.random.default_rng(1).permutation(len(B))
    shuffled = residues(FrequencySet(B.indices[perm], B.M), lat)
    assert np.array_equal(shuffled.residues, B.residues[perm])
    assert B.residues.min() >= 0 and B.residues.max() < 127


def test_residues_dimension_check():
    with pytest.raises(ValueError):
        residues(enumerate_set(KorobovSpace(2, 1, W.unweighted(2)), 4), Lattice(7, (1,)))


def test_reconstruction_report_two_radii():
    space = KorobovSpace(2, 1, W.product([0.5, 0.5]))
    lat = cbc_construct(space, 257)
    rep = reconstruction_report(space, lat, s_n_kernel(space, lat))
    assert rep["guaranteed"]["reconstructing"]
    assert rep["classical"]["M"] == pytest.approx(2 * rep["guaranteed"]["M"])
    assert rep["classical"]["size"] >= rep["guaranteed"]["size"]
    assert isinstance(rep["classical"]["reconstructing"], bool)
