"""Longest common subsequences of i.i.d. random permutations.

Builds the matrix L^(n) of pairwise LCS lengths over S_n, studies its
spectrum, constructs distributions beating the uniform one, and checks the
related inequalities numerically.
"""
from ._backend import BACKEND
from .distributions import (
    CounterexampleResult,
    Distribution,
    counterexample,
    expectation_exact,
    marginal_lcs,
    mc_expectation,
    point_mass,
    sample,
    uniform,
)
from .matrix import LcsMatrix, MatrixFreeOperator, build_dense, load, matvec, save, total_lis, verify_blocks
from .optimizer import OptimizationRun, conjecture_report, minimize
from .perm import (
    Permutation,
    compose,
    enumerate_permutations,
    inverse,
    lcs_dp_oracle,
    lcs_perm,
    lis,
    rank,
    reverse,
    unrank,
)
from .report import VerificationReport
from .spectra import SpectralSummary, extreme_eigen, full_spectrum, ratio_table, spectral_summary

__version__ = "0.1.0"
