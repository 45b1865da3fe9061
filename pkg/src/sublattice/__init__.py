"""Approximation of periodic functions from subsampled rank-1 lattices.

Submodules
----------
korobov
    weighted Korobov spaces, weights, ``r(h)`` and the reproducing kernel
lattice
    rank-1 lattices, ``S_n(z)``, CBC construction and bounds
freqsets
    frequency index sets ``{r(h) <= M}``
sampling
    random multiset subsampling and sizing rules
transforms
    DFT engine, lattice FFT operators, circulant kernel matrices
solvers
    LSQR and CG
approximation
    classical lattice rule, least squares and kernel fits
experiment
    benchmark targets, error estimation, rate fitting and sweeps
"""

from .approximation import (
    FourierApproximant,
    KernelApproximant,
    classical_approximate,
    evaluate,
    evaluate_on_shifted_lattice,
    kernel_fit,
    lsq_fit,
)
from .freqsets import FrequencySet, cardinality_bounds, enumerate_set, residues, tail_bound
from .korobov import KorobovSpace, WeightScheme, kernel_K, weight_gamma, weight_r
from .lattice import (
    Lattice,
    cbc_construct,
    is_reconstructing,
    reconstructing_radius,
    s_n_bruteforce,
    s_n_kernel,
    skorobov_bounds,
)
from .sampling import SubsampleIndex, SubsamplePlan, draw, plan_size_practice, plan_size_theory
from .solvers import SolverStats, cg_solve, iteration_bound, lsqr_solve
from .transforms import CirculantKernelOperator, LatticeOperator, dft, idft

__version__ = "0.1.0"
