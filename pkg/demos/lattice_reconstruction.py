"""Build a lattice, find the frequencies it reconstructs, and recover them.

A CBC generating vector is computed for a weighted Korobov space, the
frequency set ``{r(h) <= 1/(2 sqrt(S_n))}`` is enumerated, and a random
trigonometric polynomial on that set is recovered exactly from its values
on the lattice by one FFT.
"""

from __future__ import annotations

import numpy as np

from sublattice import (
    KorobovSpace,
    WeightScheme,
    cbc_construct,
    classical_approximate,
    enumerate_set,
    is_reconstructing,
    reconstructing_radius,
    s_n_kernel,
    skorobov_bounds,
)
from sublattice.lattice import lattice_points


def main():
    space = KorobovSpace(2, 1, WeightScheme.product([0.5, 0.5]))
    for n in (257, 1031, 4099, 16411):
        lat = cbc_construct(space, n)
        s = s_n_kernel(space, lat)
        bounds = skorobov_bounds(space, n)
        B = enumerate_set(space, reconstructing_radius(s))
        ok, _ = is_reconstructing(lat, B)
        print(f"n={n:6d} z={lat.z}  S_n={s:.3e} in [{bounds.lower:.1e}, {bounds.upper:.1e}]"
              f"  |B|={len(B):4d} reconstructing={ok}")

    rng = np.random.default_rng(0)
    coeffs = rng.standard_normal(len(B)) + 1j * rng.standard_normal(len(B))
    X = lattice_points(lat)
    values = np.exp(2j * np.pi * X @ B.indices.T) @ coeffs
    fit = classical_approximate(space, lat, values, M=B.M)
    order = [fit.B.position(h) for h in B.indices]
    err = np.abs(fit.coeffs[order] - coeffs).max()
    print(f"max coefficient error after one FFT on n={lat.n}: {err:.1e}")


if __name__ == "__main__":
    main()
