"""Local minimization of P^T L^(n) P over the probability simplex.

The objective is nonconvex for n >= 4, so these are multi-start local
searches. Restart 0 starts at the uniform distribution, restart 1 at the
counterexample P0 (n >= 4), the rest at Dirichlet(1) points drawn from
``default_rng([seed, restart_index])``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import default_workers, run_ranges
from .distributions import Distribution, counterexample, expectation_exact, uniform
from .matrix import DENSE_LIMIT, as_operator, build_dense

__all__ = ["METHODS", "OptimizerConfig", "OptimizationRun", "project_simplex", "minimize", "conjecture_report"]

METHODS = ("projected_gradient", "frank_wolfe")
_ALIASES = {"pg": "projected_gradient", "fw": "frank_wolfe"}


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1} (sort-based)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.shape[0] + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0)


@dataclass
class OptimizerConfig:
    method: str = "projected_gradient"
    restarts: int = 32
    iters: int = 5000
    seed: int = 0
    tol: float = 1e-9
    step: str = "backtracking"
    workers: int | None = None

    def __post_init__(self):
        self.method = _ALIASES.get(self.method, self.method)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.step not in ("backtracking", "diminishing"):
            raise ValueError(f"unknown step rule {self.step!r}")
        if self.restarts < 1 or self.iters < 1 or self.tol <= 0:
            raise ValueError("restarts, iters and tol must be positive")


@dataclass
class OptimizationRun:
    n: int
    method: str
    restarts: int
    iterations: int
    seed: int
    best_value: float
    best_distribution: Distribution
    trajectory: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    best_restart: int = 0

    def to_dict(self, include_distribution: bool = True) -> dict:
        d = {
            "n": self.n,
            "method": self.method,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "seed": self.seed,
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "trajectory": list(self.trajectory),
            "converged": list(self.converged),
            "starts": list(self.starts),
            "steps": list(self.steps),
        }
        if include_distribution:
            d["best_distribution"] = self.best_distribution.weights.tolist()
        return d


def _projected_gradient(op, p, cfg, callback):
    Lp = op.matvec(p)
    f = float(p @ Lp)
    t = 1.0
    for it in range(1, cfg.iters + 1):
        g = 2.0 * Lp
        if cfg.step == "diminishing":
            t_k = 1.0 / (2.0 * math.sqrt(it) * max(1.0, float(np.abs(Lp).max())))
            q = project_simplex(p - t_k * g)
            Lq = op.matvec(q)
            fq = float(q @ Lq)
        else:
            t *= 2.0
            while True:
                q = project_simplex(p - t * g)
                d = q - p
                Lq = op.matvec(q)
                fq = float(q @ Lq)
                # sufficient decrease for an L-smooth model with L = 1/t
                if fq <= f + g @ d + (d @ d) / (2.0 * t) + 1e-15 * abs(f) or t < 1e-12:
                    break
                t *= 0.5
        decrease = f - fq
        if fq <= f:
            p, Lp, f = q, Lq, fq
            if callback:
                callback(p)
        if abs(decrease) < cfg.tol:
            return p, f, True, it
    return p, f, False, cfg.iters


def _unit_column(op, k):
    if hasattr(op, "matrix"):
        return op.matrix.entries[:, k].astype(np.float64)
    e = np.zeros(op.dim)
    e[k] = 1.0
    return op.matvec(e)


def _frank_wolfe(op, p, cfg, callback):
    Lp = op.matvec(p)
    for it in range(1, cfg.iters + 1):
        if it % 100 == 0:
            Lp = op.matvec(p)
        k = int(np.argmin(Lp))
        Ls = _unit_column(op, k)
        Ld = Ls - Lp
        # phi(t) = f + b t + a t^2 along p + t (e_k - p)
        b = 2.0 * float(Ld @ p)
        a = float(Ls[k] - 2.0 * Lp[k] + p @ Lp)
        fw_gap = -b
        if fw_gap <= cfg.tol:
            return p, float(p @ Lp), True, it
        if a > 0:
            t = min(1.0, -b / (2.0 * a))
        else:
            t = 1.0 if a + b < 0 else 0.0
        if t == 0.0:
            return p, float(p @ Lp), True, it
        p = (1.0 - t) * p
        p[k] += t
        Lp = Lp + t * Ld
        if callback:
            callback(p)
    return p, float(p @ op.matvec(p)), False, cfg.iters


def _start_points(n, cfg, op):
    starts = [("uniform", uniform(n).weights.copy())]
    if n >= 4 and cfg.restarts > 1:
        starts.append(("counterexample", counterexample(n, op=op).p0.weights.copy()))
    dim = math.factorial(n)
    for r in range(len(starts), cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        starts.append(("dirichlet", rng.dirichlet(np.ones(dim))))
    return starts[: cfg.restarts]


def minimize(n: int, config: OptimizerConfig | None = None, op=None, callback=None, **kwargs) -> OptimizationRun:
    """Multi-start local minimization of the expected LCS over the simplex.

    Keyword arguments override fields of ``config``. ``callback(p)`` sees
    every accepted iterate (it must not mutate ``p``).
    """
    cfg = config or OptimizerConfig(**kwargs)
    if config is not None and kwargs:
        cfg = OptimizerConfig(**{**cfg.__dict__, **kwargs})
    if n > DENSE_LIMIT and op is None:
        raise ValueError(f"minimize needs a dense matrix (n <= {DENSE_LIMIT})")
    op = as_operator(op) if op is not None else as_operator(build_dense(n))
    starts = _start_points(n, cfg, op)
    solve = _projected_gradient if cfg.method == "projected_gradient" else _frank_wolfe

    def run_one(r, _):
        p, f, ok, steps = solve(op, starts[r][1], cfg, callback)
        return p, f, ok, steps

    workers = cfg.workers or default_workers()
    results = run_ranges(run_one, [(r, r + 1) for r in range(len(starts))], workers if callback is None else 1)
    values = [res[1] for res in results]
    best = int(np.argmin(values))
    p_best = np.maximum(results[best][0], 0.0)
    P = Distribution(n, p_best / p_best.sum())
    return OptimizationRun(
        n=n,
        method=cfg.method,
        restarts=len(starts),
        iterations=cfg.iters,
        seed=cfg.seed,
        best_value=expectation_exact(P, op),
        best_distribution=P,
        trajectory=values,
        converged=[res[2] for res in results],
        starts=[s[0] for s in starts],
        steps=[res[3] for res in results],
        best_restart=best,
    )


def conjecture_report(run: OptimizationRun, op=None) -> dict:
    """Compare a run's best value against sqrt(n), cbrt(n), uniform and P0.

    ``below_cbrt_bound`` contradicts a proven lower bound and means a bug;
    ``below_sqrt_conjecture`` would only be evidence against an open conjecture.
    """
    n = run.n
    op = as_operator(op) if op is not None else as_operator(build_dense(n))
    ce = counterexample(n, op=op)
    sqrt_n = math.sqrt(n)
    cbrt_n = n ** (1.0 / 3.0)
    return {
        "n": n,
        "method": run.method,
        "best_value": run.best_value,
        "sqrt_n": sqrt_n,
        "cbrt_n": cbrt_n,
        "uniform_value": ce.expectation_uniform,
        "counterexample_value": ce.expectation_p0,
        "gap_to_uniform": ce.expectation_uniform - run.best_value,
        "gap_to_sqrt": run.best_value - sqrt_n,
        "gap_to_cbrt": run.best_value - cbrt_n,
        "below_sqrt_conjecture": run.best_value < sqrt_n,
        "below_cbrt_bound": run.best_value < cbrt_n - 1e-9,
    }
