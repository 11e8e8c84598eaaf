"""Distributions on S_n and the expected LCS of two i.i.d. draws.

A :class:`Distribution` is a probability vector indexed by the canonical
enumeration. For i.i.d. sigma_1, sigma_2 ~ P the expected LCS is the quadratic
form P^T L^(n) P.

RNG contract: every random routine takes an integer ``seed`` and builds
``numpy.random.Generator(PCG64(SeedSequence(seed)))``. When work is split over
``workers`` chunks, chunk k draws from ``SeedSequence(seed).spawn(workers)[k]``,
so results depend on ``(seed, workers)`` and nothing else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._parallel import run_ranges, split_range
from .matrix import DENSE_LIMIT, MatrixFreeOperator, as_operator, build_dense
from .perm import Permutation, _as_perm, enumeration_array, rank
from .spectra import DEFAULT_TOL, extreme_eigen

__all__ = [
    "NORMALIZATION_TOL",
    "Distribution",
    "CounterexampleResult",
    "InconsistencyError",
    "AliasTable",
    "uniform",
    "point_mass",
    "random_dirichlet",
    "expectation_exact",
    "counterexample",
    "sample",
    "sample_indices",
    "mc_expectation",
    "marginal_lcs",
    "marginal_lcs_all",
]

NORMALIZATION_TOL = 1e-12


class InconsistencyError(RuntimeError):
    """A computed quantity contradicts a proven statement (a bug, not bad input)."""


@dataclass(frozen=True, eq=False)
class Distribution:
    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        dim = math.factorial(self.n)
        if w.shape != (dim,):
            raise ValueError(f"expected {dim} weights for n={self.n}, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1 within {NORMALIZATION_TOL}")
        w /= total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)

    @classmethod
    def from_sparse(cls, n: int, support) -> Distribution:
        w = np.zeros(math.factorial(n))
        for index, weight in support:
            w[int(index)] += float(weight)
        return cls(n, w)

    @classmethod
    def from_json(cls, data: dict) -> Distribution:
        if "weights" in data:
            return cls(int(data["n"]), np.asarray(data["weights"], dtype=np.float64))
        if "support" in data:
            return cls.from_sparse(int(data["n"]), data["support"])
        raise ValueError("distribution JSON needs 'weights' or 'support'")

    def to_json(self, sparse: bool = False) -> dict:
        if sparse:
            return {"n": self.n, "support": [[int(i), float(self.weights[i])] for i in self.support]}
        return {"n": self.n, "weights": self.weights.tolist()}


def uniform(n: int) -> Distribution:
    dim = math.factorial(n)
    return Distribution(n, np.full(dim, 1.0 / dim))


def point_mass(perm) -> Distribution:
    perm = _as_perm(perm)
    w = np.zeros(math.factorial(perm.n))
    w[rank(perm)] = 1.0
    return Distribution(perm.n, w)


def random_dirichlet(n: int, seed: int, alpha: float = 1.0) -> Distribution:
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.full(math.factorial(n), alpha))
    return Distribution(n, w / w.sum())


def _default_operator(n):
    if n <= DENSE_LIMIT:
        return as_operator(build_dense(n))
    return MatrixFreeOperator(n)


def expectation_exact(P: Distribution, op=None) -> float:
    """E_P[LCS(sigma_1, sigma_2)] = P^T L P."""
    op = as_operator(op) if op is not None else _default_operator(P.n)
    if op.n != P.n:
        raise ValueError(f"distribution degree {P.n} does not match operator degree {op.n}")
    return float(P.weights @ op.matvec(P.weights))


@dataclass(frozen=True, eq=False)
class CounterexampleResult:
    """P0 = U + c * sign * r_min, with c the largest value keeping P0 >= 0.

    For n <= 3 uniform is optimal; ``uniform_optimal`` is set and there is
    no P0.
    """

    n: int
    uniform_optimal: bool
    expectation_uniform: float
    c: float = 0.0
    sign: int = 0
    p0: Distribution | None = None
    expectation_p0: float | None = None
    gap: float = 0.0
    lambda_min: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "uniform_optimal": self.uniform_optimal,
            "c": self.c,
            "sign": self.sign,
            "lambda_min": self.lambda_min,
            "expectation_uniform": self.expectation_uniform,
            "expectation_p0": self.expectation_p0,
            "gap": self.gap,
            "p0": None if self.p0 is None else self.p0.weights.tolist(),
        }


def counterexample(n: int, tol: float = DEFAULT_TOL, seed: int = 0, op=None) -> CounterexampleResult:
    op = as_operator(op) if op is not None else _default_operator(n)
    U = uniform(n)
    expectation_u = expectation_exact(U, op)
    if n <= 3:
        return CounterexampleResult(n=n, uniform_optimal=True, expectation_uniform=expectation_u)
    lam, r = extreme_eigen(op, "smallest", tol=tol, seed=seed)
    if lam >= 0:
        raise InconsistencyError(f"smallest eigenvalue {lam} >= 0 at n={n}")
    dim = r.shape[0]
    best = None
    for s in (1, -1):
        neg = s * r < 0
        if not neg.any():
            continue
        c_s = (1.0 / dim) / float(np.max(-s * r[neg]))
        if best is None or c_s > best[0]:
            best = (c_s, s)
    c, s = best
    w = 1.0 / dim + c * s * r
    w[np.argmin(w)] = 0.0
    np.maximum(w, 0.0, out=w)
    P0 = Distribution(n, w)
    expectation_p0 = expectation_exact(P0, op)
    gap = expectation_u - expectation_p0
    if gap <= 0:
        raise InconsistencyError(f"counterexample gap {gap} is not positive at n={n}")
    return CounterexampleResult(
        n=n,
        uniform_optimal=False,
        expectation_uniform=expectation_u,
        c=c,
        sign=s,
        p0=P0,
        expectation_p0=expectation_p0,
        gap=gap,
        lambda_min=lam,
    )


class AliasTable:
    """Walker/Vose alias table: O(m) setup, O(1) per draw."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        m = w.shape[0]
        scaled = w * (m / w.sum())
        prob = np.ones(m)
        alias = np.arange(m)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            lo, hi = small.pop(), large.pop()
            prob[lo] = scaled[lo]
            alias[lo] = hi
            scaled[hi] -= 1.0 - scaled[lo]
            (small if scaled[hi] < 1.0 else large).append(hi)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
            alias[i] = i
        self.prob = prob
        self.alias = alias

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        cols = rng.integers(0, self.prob.shape[0], size=count)
        coins = rng.random(count)
        return np.where(coins < self.prob[cols], cols, self.alias[cols])


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_indices(P: Distribution, seed: int, count: int) -> np.ndarray:
    """Enumeration indices of ``count`` i.i.d. draws from ``P``."""
    return AliasTable(P.weights).draw(_rng(seed), count)


def sample(P: Distribution, seed: int, count: int) -> list[Permutation]:
    perms = enumeration_array(P.n)
    return [Permutation(tuple(row)) for row in perms[sample_indices(P, seed, count)].tolist()]


_MC_CHUNK = 1 << 18


def _mc_chunk(table, perms, seq, pairs, kernels):
    rng = np.random.Generator(np.random.PCG64(seq))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < pairs:
        m = min(_MC_CHUNK, pairs - done)
        a = table.draw(rng, m)
        b = table.draw(rng, m)
        out = np.empty(m, dtype=np.int64)
        kernels.lcs_pairs(np.ascontiguousarray(perms[a]), np.ascontiguousarray(perms[b]), out)
        total += float(out.sum())
        total_sq += float((out * out).sum())
        done += m
    return total, total_sq


def mc_expectation(P: Distribution, pairs: int, seed: int, workers: int = 1, kernels=None):
    """Monte-Carlo estimate of E_P[LCS] and its standard error.

    ``pairs`` i.i.d. pairs are split into ``workers`` chunks, each with its
    own spawned substream. LCS values are recomputed per pair, not read from
    L^(n).
    """
    if pairs < 2:
        raise ValueError("need at least 2 pairs")
    kernels = kernels or _backend.kernels
    perms = enumeration_array(P.n)
    table = AliasTable(P.weights)
    seqs = np.random.SeedSequence(seed).spawn(workers)
    ranges = split_range(0, pairs, workers)
    parts = run_ranges(
        lambda a, b: _mc_chunk(table, perms, seqs[ranges.index((a, b))], b - a, kernels),
        ranges,
        workers,
    )
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / pairs
    var = max(total_sq / pairs - mean * mean, 0.0) * pairs / (pairs - 1)
    return mean, math.sqrt(var / pairs)


def marginal_lcs(P: Distribution, a) -> float:
    """L(a) = sum_j p_j LCS(pi_j, a)."""
    a = _as_perm(a)
    if a.n != P.n:
        raise ValueError(f"degree mismatch: {a.n} vs distribution over S_{P.n}")
    perms = enumeration_array(P.n)
    out = np.empty(perms.shape[0], dtype=np.int64)
    _backend.kernels.lcs_against(perms, np.asarray(a.entries, dtype=np.uint8), out)
    return float(out @ P.weights)


def marginal_lcs_all(P: Distribution, op=None) -> np.ndarray:
    """Vector of L(pi_i) for every i, i.e. L^(n) P."""
    op = as_operator(op) if op is not None else _default_operator(P.n)
    return op.matvec(P.weights)
