"""Finite checks of the LCS inequalities and spectral bounds.

Integer claims (triple product, Erdos-Szekeres) are checked in exact integer
arithmetic. Spectral inequalities use an absolute slack of 1e-6. A report
with ``mode="exhaustive"`` and no violations is a complete verification at
that n; ``mode="sampled"`` only records that no counterexample was found.
"""
from __future__ import annotations


import numpy as np

from . import _backend
from ._parallel import default_workers, run_ranges, split_range
from .distributions import Distribution, _rng, expectation_exact, marginal_lcs_all
from .matrix import as_operator, build_dense, total_lis, verify_blocks
from .perm import enumeration_array, lcs_perm
from .report import VerificationReport
from .spectra import DEFAULT_TOL, spectral_summary

__all__ = [
    "SPECTRAL_SLACK",
    "TRIPLE_EXHAUSTIVE_LIMIT",
    "triple_product",
    "check_triple_product",
    "check_erdos_szekeres",
    "check_spectral_claims",
    "check_cubic_chain",
    "check_blocks",
]

SPECTRAL_SLACK = 1e-6
CHAIN_SLACK = 1e-9
TRIPLE_EXHAUSTIVE_LIMIT = 5
TRIPLE_FLAG_LIMIT = 6
TRIPLE_SAMPLED_LIMIT = 10


def triple_product(a, b, c) -> int:
    return lcs_perm(a, b) * lcs_perm(b, c) * lcs_perm(c, a)


def _perm_list(perms, *idx):
    return [perms[i].tolist() for i in idx]


def _triple_exhaustive(n, workers):
    L = build_dense(n).entries.astype(np.int64)
    dim = L.shape[0]

    def scan(lo, hi):
        best = None
        bad = 0
        for i in range(lo, hi):
            # prod[j, k] = L[i, j] * L[j, k] * L[k, i]
            prod = L[i][:, None] * L * L[:, i][None, :]
            bad += int((prod < n).sum())
            flat = int(np.argmin(prod))
            value = int(prod.flat[flat])
            if best is None or value < best[0]:
                best = (value, i, flat // dim, flat % dim)
        return bad, best

    parts = run_ranges(scan, split_range(0, dim, workers), workers)
    bad = sum(p[0] for p in parts)
    best = min((p[1] for p in parts), key=lambda t: (t[0], t[1], t[2], t[3]))
    return dim ** 3, bad, best


def check_triple_product(n: int, mode: str = "auto", sample_count: int = 10 ** 6, seed: int = 0,
                         workers: int | None = None, allow_n6: bool = False) -> VerificationReport:
    """LCS(a,b) LCS(b,c) LCS(c,a) >= n over all (or sampled) triples.

    ``mode="auto"`` is exhaustive for n <= 5 and sampled above. Exhaustive at
    n = 6 (3.7e8 triples) needs ``allow_n6=True``.
    """
    workers = workers or default_workers()
    if mode == "auto":
        mode = "exhaustive" if n <= TRIPLE_EXHAUSTIVE_LIMIT else "sampled"
    if mode == "exhaustive":
        limit = TRIPLE_FLAG_LIMIT if allow_n6 else TRIPLE_EXHAUSTIVE_LIMIT
        if n > limit:
            raise ValueError(f"exhaustive triple check limited to n <= {limit}")
        cases, bad, (value, i, j, k) = _triple_exhaustive(n, workers)
        perms = enumeration_array(n)
        witness = {"indices": [i, j, k], "perms": _perm_list(perms, i, j, k), "product": value}
    elif mode == "sampled":
        if n > TRIPLE_SAMPLED_LIMIT:
            raise ValueError(f"sampled triple check limited to n <= {TRIPLE_SAMPLED_LIMIT}")
        cases, bad, value, witness = _triple_sampled(n, sample_count, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return VerificationReport(
        n=n, claim="triple_product", mode=mode, cases=cases, violations=bad,
        witness=witness, slack=float(value - n), details={"min_product": value},
    )


def _random_perms(rng, n, count):
    keys = rng.random((count, n))
    return (np.argsort(keys, axis=1) + 1).astype(np.uint8)


def _triple_sampled(n, count, seed):
    k = _backend.kernels
    rng = _rng(seed)
    a, b, c = (_random_perms(rng, n, count) for _ in range(3))
    ab, bc, ca = (np.empty(count, dtype=np.int64) for _ in range(3))
    k.lcs_pairs(a, b, ab)
    k.lcs_pairs(b, c, bc)
    k.lcs_pairs(c, a, ca)
    prod = ab * bc * ca
    r = int(np.argmin(prod))
    witness = {
        "sample": r,
        "perms": [a[r].tolist(), b[r].tolist(), c[r].tolist()],
        "product": int(prod[r]),
    }
    return count, int((prod < n).sum()), int(prod[r]), witness


def check_erdos_szekeres(n: int) -> VerificationReport:
    """LCS(id, pi) * LCS(rev(id), pi) >= n for every pi in S_n (n <= 8)."""
    if n > 8:
        raise ValueError("Erdos-Szekeres check is exhaustive and limited to n <= 8")
    perms = enumeration_array(n)
    k = _backend.kernels
    inc = np.empty(perms.shape[0], dtype=np.int64)
    dec = np.empty(perms.shape[0], dtype=np.int64)
    k.lcs_against(perms, np.arange(1, n + 1, dtype=np.uint8), inc)
    k.lcs_against(perms, np.arange(n, 0, -1, dtype=np.uint8), dec)
    prod = inc * dec
    low = int(prod.min())
    tight = np.flatnonzero(prod == low)
    tight_perms = [perms[i].tolist() for i in tight]
    ident = list(range(1, n + 1))
    return VerificationReport(
        n=n, claim="erdos_szekeres", mode="exhaustive", cases=int(perms.shape[0]),
        violations=int((prod < n).sum()),
        witness={"index": int(tight[0]), "perm": tight_perms[0], "product": low},
        slack=float(low - n),
        details={
            "tight_count": int(tight.size),
            "identity_tight": ident in tight_perms,
            "reversal_tight": ident[::-1] in tight_perms,
        },
    )


def check_spectral_claims(n_max: int, tol: float = DEFAULT_TOL, slack: float = SPECTRAL_SLACK,
                          seed: int = 0, summaries=None) -> VerificationReport:
    """Spectral radius, growth bounds and negativity of lambda_1 for n = 2..n_max.

    Each failed inequality counts as one violation; ``details["checks"]``
    lists every inequality with its slack.
    """
    if not 2 <= n_max <= 7:
        raise ValueError("n_max must be in 2..7")
    summaries = summaries or {n: spectral_summary(n, tol=tol, seed=seed) for n in range(2, n_max + 1)}
    checks = []

    def record(name, n, lhs, rhs):
        # every claim is phrased as lhs <= rhs
        checks.append({"check": name, "n": n, "lhs": lhs, "rhs": rhs, "slack": rhs - lhs,
                       "ok": lhs <= rhs + slack})

    for n in range(2, n_max + 1):
        s = summaries[n]
        rho = float(total_lis(n))
        record("spectral_radius", n, max(abs(s.lambda_min), abs(s.lambda_max), abs(s.lambda_second_max)), rho)
        record("lambda_max_is_row_sum", n, abs(s.lambda_max - rho), 0.0)
        record("second_largest_lower_bound", n, 2.0 ** (n - 2), s.lambda_second_max)
        if n >= 4:
            record("lambda_min_upper_bound", n, s.lambda_min, -(2.0 ** (n - 3)))
            checks.append({"check": "lambda_min_negative", "n": n, "lhs": s.lambda_min, "rhs": 0.0,
                           "slack": -s.lambda_min, "ok": s.lambda_min < -slack})
        if n > 2:
            prev = summaries[n - 1]
            # strict decrease, so the margin must beat the slack
            checks.append({"check": "lambda_min_strictly_decreasing", "n": n, "lhs": s.lambda_min,
                           "rhs": prev.lambda_min, "slack": prev.lambda_min - s.lambda_min,
                           "ok": s.lambda_min < prev.lambda_min - slack})
            record("lambda_min_doubling", n, s.lambda_min, 2.0 * prev.lambda_min)
            record("second_largest_doubling", n, 2.0 * prev.lambda_second_max, s.lambda_second_max)
    failed = [c for c in checks if not c["ok"]]
    tightest = min(checks, key=lambda c: c["slack"])
    return VerificationReport(
        n=n_max, claim="spectral_claims", mode="exhaustive", cases=len(checks),
        violations=len(failed), witness=failed[0] if failed else tightest,
        slack=float(tightest["slack"]),
        details={"checks": checks},
    )


def check_cubic_chain(P: Distribution, pairwise: bool | None = None, op=None) -> VerificationReport:
    """The averaging chain behind E_P[LCS] >= cbrt(n).

    Layers: (a) L(b) + LCS(b, c) + L(c) >= 3 cbrt(n) for every pair (b, c),
    where L(x) = sum_a p(a) LCS(a, x); (b) sum_x p(x) L(x) >= cbrt(n);
    (c) P^T L P >= cbrt(n), computed independently of (b). Layer (a) needs the
    dense matrix and runs by default for n <= 6.
    """
    n = P.n
    cbrt = n ** (1.0 / 3.0)
    op = as_operator(op) if op is not None else as_operator(build_dense(n))
    if pairwise is None:
        pairwise = n <= 6
    marg = marginal_lcs_all(P, op)
    layers = {}
    cases = 0
    violations = 0
    witness = None
    if pairwise:
        if not hasattr(op, "matrix"):
            raise ValueError("pairwise layer needs a dense matrix")
        L = op.matrix.entries
        dim = L.shape[0]
        best = None
        for b in range(dim):
            row = marg[b] + L[b].astype(np.float64) + marg
            c = int(np.argmin(row))
            if best is None or row[c] < best[0]:
                best = (float(row[c]), b, c)
            violations += int((row < 3 * cbrt - CHAIN_SLACK).sum())
        cases += dim * dim
        layers["pairwise"] = {"min": best[0], "bound": 3 * cbrt, "slack": best[0] - 3 * cbrt}
        witness = {"pair": [best[1], best[2]], "value": best[0]}
    aggregate = float(P.weights @ marg)
    expectation = expectation_exact(P, op)
    for name, value in (("aggregate", aggregate), ("expectation", expectation)):
        layers[name] = {"value": value, "bound": cbrt, "slack": value - cbrt}
        cases += 1
        if value < cbrt - CHAIN_SLACK:
            violations += 1
    slack = min(layer["slack"] for layer in layers.values())
    return VerificationReport(
        n=n, claim="cubic_chain", mode="exhaustive", cases=cases, violations=violations,
        witness=witness, slack=float(slack), details={"layers": layers},
    )


def check_blocks(n: int) -> VerificationReport:
    return verify_blocks(n)
