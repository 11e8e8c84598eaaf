"""Extreme eigenpairs of L^(n).

The all-ones vector E is always an eigenvector of L^(n), with eigenvalue
total_lis(n), and that eigenvalue is the spectral radius. So the smallest and
second-largest eigenvalues are the extremes of L^(n) restricted to the
orthogonal complement of E. :func:`extreme_eigen` gets them by Lanczos with
full reorthogonalization, projecting E out of every Krylov vector.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .matrix import DENSE_LIMIT, LcsMatrix, MatrixFreeOperator, as_operator, build_dense, total_lis

__all__ = [
    "DEFAULT_TOL",
    "WHICH",
    "ConvergenceError",
    "SpectralSummary",
    "extreme_eigen",
    "full_spectrum",
    "spectral_summary",
    "ratio_table",
    "table_to_csv",
    "FULL_SPECTRUM_LIMIT",
]

DEFAULT_TOL = 1e-10
WHICH = ("smallest", "second_largest", "largest")
FULL_SPECTRUM_LIMIT = 6


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


def _fix_sign(v, eps=1e-12):
    nz = np.flatnonzero(np.abs(v) > eps)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _lanczos(apply, dim, want, tol, rng, deflate=None, max_iter=None):
    """Lanczos with full reorthogonalization.

    ``want`` is "min" or "max". ``deflate`` is a unit vector kept out of the
    Krylov space. Returns (theta, unit Ritz vector, true residual).
    """
    basis_dim = dim - (1 if deflate is not None else 0)
    if max_iter is None:
        max_iter = int(50 * math.sqrt(dim))
    max_iter = max(1, min(max_iter, basis_dim))

    def project(w, V):
        if deflate is not None:
            w -= deflate * (deflate @ w)
        if V:
            Q = np.asarray(V)
            for _ in range(2):
                w -= Q.T @ (Q @ w)
        return w

    v = project(rng.standard_normal(dim), [])
    v /= np.linalg.norm(v)
    V = [v]
    alphas, betas = [], []
    residual = np.inf
    for j in range(max_iter):
        w = apply(V[-1])
        alphas.append(float(V[-1] @ w))
        w = project(w, V)
        beta = float(np.linalg.norm(w))
        exhausted = beta <= 1e-12 * max(1.0, abs(alphas[-1])) or len(V) == basis_dim
        # check every few steps, and always when the space is exhausted
        if exhausted or j % 5 == 4 or j == max_iter - 1:
            if len(alphas) == 1:
                thetas, S = np.array(alphas), np.ones((1, 1))
            else:
                thetas, S = eigh_tridiagonal(np.array(alphas), np.array(betas))
            k = 0 if want == "min" else len(thetas) - 1
            theta = float(thetas[k])
            estimate = abs(beta * S[-1, k])
            if exhausted or estimate <= tol * max(1.0, abs(theta)):
                y = np.asarray(V).T @ S[:, k]
                y = project(y, []) if deflate is not None else y
                y /= np.linalg.norm(y)
                residual = float(np.linalg.norm(apply(y) - theta * y))
                if residual <= tol * max(1.0, abs(theta)):
                    return theta, y, residual
                if exhausted:
                    break
        if exhausted:
            break
        betas.append(beta)
        V.append(w / beta)
    raise ConvergenceError(f"Lanczos ({want}) did not converge in {len(alphas)} steps", residual)


def extreme_eigen(op, which: str = "smallest", tol: float = DEFAULT_TOL, seed: int = 0, max_iter: int | None = None):
    """Return ``(eigenvalue, unit eigenvector)`` for one end of the spectrum.

    ``largest`` is the dominant pair of the full operator. ``smallest`` and
    ``second_largest`` are computed on the complement of the all-ones vector,
    which amounts to skipping the dominant eigenvalue. The vector's first
    nonzero component is made positive.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}, got {which!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = as_operator(op)
    dim = op.dim
    rng = np.random.default_rng(seed)
    if dim == 1:
        return float(op.matvec(np.ones(1))[0]), np.ones(1)
    if which == "largest":
        theta, y, _ = _lanczos(op.matvec, dim, "max", tol, rng, max_iter=max_iter)
    else:
        e = np.full(dim, 1.0 / math.sqrt(dim))
        want = "min" if which == "smallest" else "max"
        theta, y, _ = _lanczos(op.matvec, dim, want, tol, rng, deflate=e, max_iter=max_iter)
    return theta, _fix_sign(y)


def full_spectrum(matrix: LcsMatrix) -> np.ndarray:
    """All eigenvalues, ascending. Only for n <= 6."""
    if matrix.n > FULL_SPECTRUM_LIMIT:
        raise ValueError(f"full spectrum limited to n <= {FULL_SPECTRUM_LIMIT}, got n={matrix.n}")
    return np.linalg.eigvalsh(matrix.entries.astype(np.float64))


@dataclass
class SpectralSummary:
    n: int
    lambda_min: float
    lambda_second_max: float
    lambda_max: float
    r_min: np.ndarray = field(repr=False)
    residuals: dict
    tol: float
    total_lis: int

    @property
    def spectral_radius(self) -> float:
        return max(abs(self.lambda_min), abs(self.lambda_max))

    def to_dict(self, include_vector: bool = False) -> dict:
        d = {
            "n": self.n,
            "lambda_min": self.lambda_min,
            "lambda_second_max": self.lambda_second_max,
            "lambda_max": self.lambda_max,
            "total_lis": self.total_lis,
            "residuals": dict(self.residuals),
            "tol": self.tol,
        }
        if include_vector:
            d["r_min"] = self.r_min.tolist()
        return d


def _operator_for(n, matrix_free, workers):
    if matrix_free or n > DENSE_LIMIT:
        return MatrixFreeOperator(n, workers=workers)
    return as_operator(build_dense(n, workers=workers))


def spectral_summary(n: int, tol: float = DEFAULT_TOL, seed: int = 0, matrix_free: bool = False,
                     workers: int | None = None, op=None) -> SpectralSummary:
    """Smallest, second-largest and largest eigenvalues of L^(n).

    Dense for n <= 7, matrix-free for n = 8 (hours of work on one core).
    """
    if n < 2:
        raise ValueError("spectral summary needs n >= 2")
    op = as_operator(op) if op is not None else _operator_for(n, matrix_free, workers)
    residuals = {}
    pairs = {}
    for which in WHICH:
        lam, vec = extreme_eigen(op, which, tol=tol, seed=seed)
        residuals[which] = float(np.linalg.norm(op.matvec(vec) - lam * vec))
        pairs[which] = (lam, vec)
    return SpectralSummary(
        n=n,
        lambda_min=pairs["smallest"][0],
        lambda_second_max=pairs["second_largest"][0],
        lambda_max=pairs["largest"][0],
        r_min=pairs["smallest"][1],
        residuals=residuals,
        tol=tol,
        total_lis=total_lis(n),
    )


def ratio_table(n_max: int, tol: float = DEFAULT_TOL, seed: int = 0, matrix_free: bool = False,
                workers: int | None = None) -> list[dict]:
    """Rows n = 4..n_max of the eigenvalue growth table.

    Row n carries lambda_1^(n), lambda_{n!-1}^(n) and their ratios to the
    previous degree. The lambda_1 ratio of row 4 is undefined (lambda_1^(3) = 0)
    and is reported as None.
    """
    if not 4 <= n_max <= 8:
        raise ValueError("n_max must be in 4..8")
    if n_max == 8 and not matrix_free:
        raise ValueError("n_max = 8 needs matrix_free=True")
    summaries = {
        n: spectral_summary(n, tol=tol, seed=seed, matrix_free=matrix_free and n == 8, workers=workers)
        for n in range(3, n_max + 1)
    }
    rows = []
    for n in range(4, n_max + 1):
        cur, prev = summaries[n], summaries[n - 1]
        lam_prev = prev.lambda_min
        rows.append({
            "n": n,
            "lambda_min": cur.lambda_min,
            "lambda_min_ratio": None if abs(lam_prev) <= 1e-8 else cur.lambda_min / lam_prev,
            "lambda_second_max": cur.lambda_second_max,
            "lambda_second_max_ratio": cur.lambda_second_max / prev.lambda_second_max,
        })
    return rows


RATIO_COLUMNS = ("n", "lambda_min", "lambda_min_ratio", "lambda_second_max", "lambda_second_max_ratio")


def table_to_csv(rows, columns=RATIO_COLUMNS, decimals: int = 6) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for col in columns:
            value = row.get(col)
            if value is None:
                out.append("")
            elif isinstance(value, float):
                out.append(f"{value:.{decimals}f}")
            else:
                out.append(str(value))
        writer.writerow(out)
    return buf.getvalue()
