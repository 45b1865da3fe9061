import logging

import numpy as np
import pytest

from sublattice.approximation import (
    CLASSICAL,
    LEAST_SQUARES,
    FourierApproximant,
    KernelApproximant,
    classical_approximate,
    evaluate,
    evaluate_on_shifted_lattice,
    kernel_fit,
    lsq_fit,
)
from sublattice.freqsets import FrequencySet, enumerate_set, residues
from sublattice.korobov import KorobovSpace, WeightScheme, kernel_at, kernel_K
from sublattice.lattice import (
    Lattice,
    cbc_construct,
    classical_radius,
    lattice_points,
    reconstructing_radius,
    s_n_kernel,
)
from sublattice.sampling import SubsampleIndex, SubsamplePlan, draw

W = WeightScheme
HALF2 = KorobovSpace(2, 1, W.product([0.5, 0.5]))
RNG = np.random.default_rng(77)


def crandn(*shape):
    return RNG.standard_normal(shape) + 1j * RNG.standard_normal(shape)


def subsample(entries, n):
    return SubsampleIndex(np.asarray(entries), n, SubsamplePlan(size_override=len(entries)))


def trig(H, coeffs, X):
    return np.exp(2j * np.pi * X @ np.asarray(H).T) @ coeffs


@pytest.fixture(scope="module")
def setup_4099():
    lat = cbc_construct(HALF2, 4099)
    s = s_n_kernel(HALF2, lat)
    B = enumerate_set(HALF2, reconstructing_radius(s))
    return lat, s, B


# -- classical -------------------------------------------------------------


def test_classical_character_recovered(setup_4099):
    lat, s, _ = setup_4099
    approx = classical_approximate(HALF2, lat, np.ones(lat.n))
    assert approx.method == CLASSICAL
    assert len(approx.B) == len(enumerate_set(HALF2, classical_radius(s)))
    B = residues(enumerate_set(HALF2, reconstructing_radius(s)), lat)
    h0 = B.indices[-1]
    f = np.exp(2j * np.pi * lattice_points(lat) @ h0)
    g = classical_approximate(HALF2, lat, f, M=B.M)
    expected = np.zeros(len(B))
    expected[B.position(h0)] = 1
    assert np.allclose(g.coeffs, expected, atol=1e-12)


def test_classical_aliasing_pair():
    lat = Lattice(8, (1, 3))
    space = KorobovSpace(2, 1, W.unweighted(2))
    # (1,1) and (-2, 2) share residue 4 on this lattice
    h, hp = np.array([1, 1]), np.array([-2, 2])
    assert (h @ lat.z) % 8 == (hp @ lat.z) % 8
    f = trig([h, hp], np.array([0.7, -0.2j]), lattice_points(lat))
    g = classical_approximate(space, lat, f, M=16)
    assert g.coeffs[g.B.position(h)] == pytest.approx(0.7 - 0.2j, abs=1e-12)
    assert g.coeffs[g.B.position(hp)] == pytest.approx(0.7 - 0.2j, abs=1e-12)


def test_classical_constant():
    lat = Lattice(67, (1, 20))
    g = classical_approximate(HALF2, lat, np.full(67, 3.5), M=20)
    assert g.coeffs[g.B.position((0, 0))] == pytest.approx(3.5)
    others = np.delete(g.coeffs, g.B.position((0, 0)))
    assert np.allclose(others, 0, atol=1e-13)


def test_classical_errors():
    lat = Lattice(67, (1, 20))
    with pytest.raises(ValueError):
        classical_approximate(HALF2, lat, np.ones(66))
    with pytest.raises(ValueError):
        classical_approximate(HALF2, lat, np.ones(67), M=0.5)


# -- least squares ---------------------------------------------------------


def test_lsq_recovers_polynomial(setup_4099):
    lat, _, B = setup_4099
    J = draw(SubsamplePlan("theory", t=4, seed=5), lat.n, len(B))
    fhat = crandn(len(B))
    f = trig(B.indices, fhat, lattice_points(lat, J.entries))
    approx = lsq_fit(HALF2, lat, B, J, f, tol=1e-12)
    assert approx.method == LEAST_SQUARES and approx.stats.converged
    assert np.allclose(approx.coeffs, fhat, atol=1e-9)


def test_lsq_full_equals_classical(setup_4099):
    lat, _, B = setup_4099
    f = RNG.standard_normal(lat.n)
    full = lsq_fit(HALF2, lat, B, None, f)
    full_J = lsq_fit(HALF2, lat, B, draw(SubsamplePlan("full"), lat.n), f)
    classical = classical_approximate(HALF2, lat, f, M=B.M)
    assert np.allclose(full.coeffs, classical.coeffs, atol=1e-10)
    assert np.allclose(full_J.coeffs, classical.coeffs, atol=1e-10)
    assert full.stats.iterations == 0


def test_lsq_matches_dense_normal_equations():
    n = 32
    lat = Lattice(n, (1, 7))
    B = FrequencySet(np.array([[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]]), 4.0)
    J = subsample(np.sort(RNG.choice(n, 20, replace=False)), n)
    f = crandn(20)
    L = np.exp(2j * np.pi * np.outer(J.entries, residues(B, lat).residues) / n)
    ref = np.linalg.solve(L.conj().T @ L, L.conj().T @ f)
    approx = lsq_fit(HALF2, lat, B, J, f, tol=1e-12)
    assert np.allclose(approx.coeffs, ref, atol=1e-8)


def test_lsq_projection_idempotent(setup_4099):
    lat, _, B = setup_4099
    J = draw(SubsamplePlan("practice", seed=9), lat.n)
    f = RNG.standard_normal(len(J))
    first = lsq_fit(HALF2, lat, B, J, f, tol=1e-12)
    again = lsq_fit(HALF2, lat, B, J, evaluate(first, lattice_points(lat, J.entries)), tol=1e-12)
    assert np.allclose(again.coeffs, first.coeffs, atol=1e-9)


def test_error_decomposition_orthogonal():
    space = HALF2
    lat = cbc_construct(space, 1031)
    B = enumerate_set(space, reconstructing_radius(s_n_kernel(space, lat)))
    F = enumerate_set(space, 4 * B.M)
    fhat = crandn(len(F)) / np.sqrt(1 + np.abs(F.indices).sum(axis=1)) ** 3
    J = draw(SubsamplePlan("theory", t=4, seed=1), lat.n, len(B))
    S = lsq_fit(space, lat, B, J, trig(F.indices, fhat, lattice_points(lat, J.entries)), tol=1e-13)
    inB = np.array([B.position(h) for h in F.indices])
    proj = np.where(inB >= 0, fhat, 0)
    Sf_on_F = np.zeros(len(F), dtype=complex)
    Sf_on_F[inB >= 0] = S.coeffs[inB[inB >= 0]]
    # quadrature on a tensor grid fine enough to integrate the products exactly
    N = 2 * int(np.abs(F.indices).max()) + 3
    g = np.arange(N) / N
    X = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)

    def l2sq(c):
        return float(np.mean(np.abs(trig(F.indices, c, X)) ** 2))

    total = l2sq(fhat - Sf_on_F)
    parts = l2sq(fhat - proj) + l2sq(proj - Sf_on_F)
    assert total == pytest.approx(parts, rel=1e-8)


def test_lsq_errors(setup_4099):
    lat, _, B = setup_4099
    with pytest.raises(ValueError):
        lsq_fit(HALF2, lat, B, subsample([1, 2], lat.n), np.ones(2))
    with pytest.raises(ValueError):
        lsq_fit(HALF2, lat, FrequencySet(np.zeros((0, 2), dtype=int), 0.5), None, np.ones(lat.n))
    J = draw(SubsamplePlan("practice", seed=1), lat.n)
    with pytest.raises(ValueError):
        lsq_fit(HALF2, lat, B, J, np.ones(len(J) + 1))
    bad = Lattice(5, (1, 2))
    with pytest.raises(ValueError, match="collide"):
        lsq_fit(HALF2, bad, enumerate_set(HALF2, 10), None, np.ones(5), check=True)


def test_lsq_nonconvergence_surfaced(setup_4099):
    lat, _, B = setup_4099
    J = draw(SubsamplePlan("practice", seed=2), lat.n)
    with pytest.warns(UserWarning, match="LSQR"):
        approx = lsq_fit(HALF2, lat, B, J, RNG.standard_normal(len(J)), tol=1e-15, max_iter=1)
    assert not approx.stats.converged


# -- kernel ----------------------------------------------------------------


def test_kernel_full_matches_dense():
    space = KorobovSpace(1, 1, W.unweighted(1))
    lat = Lattice(8, (1,))
    f = RNG.standard_normal(8)
    approx = kernel_fit(space, lat, None, f)
    X = lattice_points(lat)
    K = kernel_K(space, X[:, None, :], X[None, :, :])
    assert np.allclose(approx.coeffs, np.linalg.solve(K, f), atol=1e-8)
    assert np.allclose(evaluate(approx, X), f, atol=1e-10)


def test_kernel_interpolates_subsample():
    space = KorobovSpace(2, 2, W.product([0.8, 0.5]))
    lat = cbc_construct(space, 1031)
    J = draw(SubsamplePlan("practice", seed=4), lat.n)
    f = np.cos(2 * np.pi * lattice_points(lat, J.entries)).sum(axis=1)
    approx = kernel_fit(space, lat, J, f, tol=1e-11, max_iter=5000)
    assert approx.stats.converged
    assert np.allclose(evaluate(approx, lattice_points(lat, J.entries)), f, atol=1e-8)
    assert np.isrealobj(approx.coeffs)


def test_kernel_translate_gives_unit_coefficients():
    space = KorobovSpace(2, 1, W.product([0.6, 0.3]))
    lat = Lattice(127, (1, 35))
    rows = np.array([3, 17, 40, 41, 90, 126])
    k0 = 3
    X = lattice_points(lat, rows)
    f = kernel_at(space, np.mod(X - lattice_points(lat, [rows[k0]]), 1.0))
    approx = kernel_fit(space, lat, subsample(rows, lat.n), f, tol=1e-13)
    expected = np.zeros(len(rows))
    expected[k0] = 1
    assert np.allclose(approx.coeffs, expected, atol=1e-7)


def test_kernel_merges_repeated_rows(caplog):
    space = HALF2
    lat = Lattice(67, (1, 20))
    J = subsample([5, 5, 9, 30, 30, 30], 67)
    f = np.array([1.0, 1.0, 2.0, 3.0, 3.0, 3.0])
    with caplog.at_level(logging.INFO, logger="sublattice.approximation"):
        approx = kernel_fit(space, lat, J, f, tol=1e-12)
    assert approx.rows.tolist() == [5, 9, 30]
    assert "merged 3" in caplog.text
    assert np.allclose(evaluate(approx, lattice_points(lat, approx.rows)), [1, 2, 3], atol=1e-9)


def test_kernel_sample_count_checked():
    lat = Lattice(67, (1, 20))
    with pytest.raises(ValueError):
        kernel_fit(HALF2, lat, None, np.ones(60))
    with pytest.raises(ValueError):
        kernel_fit(HALF2, lat, subsample([1, 2], 67), np.ones(3))


# -- evaluation ------------------------------------------------------------


def test_evaluate_constant_mode():
    B = FrequencySet(np.array([[0, 0], [1, 0]]), 2.0)
    approx = FourierApproximant(B, np.array([1.0 + 0j, 0.0]), LEAST_SQUARES, Lattice(7, (1, 2)))
    assert np.allclose(evaluate(approx, RNG.random((9, 2))), 1)
    with pytest.raises(ValueError):
        evaluate(approx, RNG.random((3, 3)))


def test_approximant_validation():
    B = FrequencySet(np.array([[0, 0]]), 2.0)
    with pytest.raises(ValueError):
        FourierApproximant(B, np.ones(2), CLASSICAL, Lattice(7, (1, 2)))
    with pytest.raises(ValueError):
        FourierApproximant(B, np.array([np.nan]), CLASSICAL, Lattice(7, (1, 2)))
    with pytest.raises(ValueError):
        KernelApproximant(HALF2, Lattice(7, (1, 2)), np.array([0, 1]), np.ones(1))


def test_fourier_evaluate_on_lattice_matches_forward(setup_4099):
    lat, _, B = setup_4099
    approx = FourierApproximant(B, crandn(len(B)), LEAST_SQUARES, lat)
    direct = evaluate(approx, lattice_points(lat))
    assert np.allclose(evaluate_on_shifted_lattice(approx, np.zeros(2)), direct, atol=1e-11)


def test_fourier_shifted_single_mode():
    lat = Lattice(67, (1, 20))
    B = FrequencySet(np.array([[2, -1]]), 4.0)
    approx = FourierApproximant(B, np.array([1.0 + 0j]), LEAST_SQUARES, lat)
    shift = np.array([0.3, 0.77])
    expected = np.exp(2j * np.pi * np.mod(lattice_points(lat) + shift, 1.0) @ np.array([2, -1]))
    assert np.allclose(evaluate_on_shifted_lattice(approx, shift), expected, atol=1e-12)
    with pytest.raises(ValueError):
        evaluate_on_shifted_lattice(approx, np.zeros(3))


@pytest.mark.parametrize("complex_coeffs", [False, True])
def test_kernel_shifted_matches_naive(complex_coeffs):
    space = KorobovSpace(2, 1, W.product([0.7, 0.4]))
    lat = Lattice(32, (1, 13))
    rows = np.array([0, 3, 3, 8, 21, 31])
    coeffs = crandn(len(rows)) if complex_coeffs else RNG.standard_normal(len(rows))
    approx = KernelApproximant(space, lat, rows, coeffs)
    shift = RNG.random(2)
    pts = np.mod(lattice_points(lat) + shift, 1.0)
    naive = np.array([sum(a * kernel_at(space, np.mod(x - lattice_points(lat, [k])[0], 1.0))
                          for a, k in zip(coeffs, rows)) for x in pts])
    assert np.allclose(evaluate_on_shifted_lattice(approx, shift), naive, atol=1e-9)
    assert np.allclose(evaluate(approx, pts), naive, atol=1e-9)
