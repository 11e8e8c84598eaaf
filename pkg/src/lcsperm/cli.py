"""Command-line entry point.

Exit codes: 0 success, 1 a proven claim failed (or an internal inconsistency
contradicting one), 2 usage error, 3 runtime error. Errors print one line to
stderr: ``error: <kind>: <message>``.

JSON output is deterministic for fixed arguments; timing and backend
information go to the optional ``--meta`` file instead.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from . import distributions as dist
from . import matrix as lm
from . import optimizer as opt
from . import spectra
from . import verify as ver
from ._parallel import default_workers
from .perm import Permutation

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ClaimViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _fmt(x, decimals=4):
    """Truncate toward zero, as the published table does (6.60555 -> 6.6055).

    Rounding to 8 places first keeps float noise such as -1.9999999999999996
    from truncating to -1.9999.
    """
    if x is None:
        return "-"
    scale = 10 ** decimals
    return f"{math.trunc(round(x, 8) * scale) / scale:.{decimals}f}"


def _text_table(header, rows):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
    line = "  ".join(str(h).rjust(w) for h, w in zip(header, widths))
    out = [line, "-" * len(line)]
    out += ["  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out) + "\n"


def _require(cond, message):
    if not cond:
        raise UsageError(message)


def _load_distribution(spec: str, n: int, seed: int) -> dist.Distribution:
    if spec == "uniform":
        return dist.uniform(n)
    if spec == "counterexample":
        res = dist.counterexample(n, seed=seed)
        _require(not res.uniform_optimal, f"no counterexample for n={n} (uniform is optimal for n <= 3)")
        return res.p0
    if spec in ("id", "point-mass"):
        return dist.point_mass(Permutation.identity(n))
    path = Path(spec)
    _require(path.exists(), f"distribution file {spec!r} not found")
    P = dist.Distribution.from_json(json.loads(path.read_text()))
    _require(P.n == n, f"distribution file is over S_{P.n}, expected S_{n}")
    return P


# subcommands: each returns (payload, text, csv or None, ok)

def cmd_build(a):
    _require(a.n >= 1, "--n must be >= 1")
    m = lm.build_dense(a.n, allow_large=a.allow_large, workers=a.workers)
    out = a.out or f"l{a.n}.lcsm"
    lm.save(m, out)
    payload = {"n": a.n, "dim": m.dim, "path": str(out), "total_lis": lm.total_lis(a.n)}
    text = f"wrote L^({a.n}) ({m.dim}x{m.dim}) to {out}\n"
    return payload, text, None, True


def cmd_eigen(a):
    op = None
    n = a.n
    if a.matrix:
        m = lm.load(a.matrix)
        _require(n is None or n == m.n, f"--n {n} does not match matrix file degree {m.n}")
        n = m.n
        op = lm.DenseOperator(m)
    _require(n is not None and n >= 2, "--n >= 2 (or --matrix) required")
    dim = math.factorial(n)
    if a.which == "all-small-n":
        _require(n <= spectra.FULL_SPECTRUM_LIMIT, f"full spectrum only for n <= {spectra.FULL_SPECTRUM_LIMIT}")
        m = op.matrix if op is not None else lm.build_dense(n)
        values = spectra.full_spectrum(m)
        payload = {"n": n, "eigenvalues": values.tolist()}
        text = "".join(f"lambda_{i} = {_fmt(v)}\n" for i, v in enumerate(values, start=1))
        csv_text = "index,eigenvalue\n" + "".join(f"{i},{v:.6f}\n" for i, v in enumerate(values, start=1))
        return payload, text, csv_text, True
    if a.which:
        which = a.which.replace("-", "_")
        if op is None and (a.matrix_free or n > lm.LARGE_DENSE_LIMIT):
            op = lm.MatrixFreeOperator(n, workers=a.workers)
        elif op is None:
            op = lm.as_operator(lm.build_dense(n, allow_large=a.allow_large, workers=a.workers))
        lam, vec = spectra.extreme_eigen(op, which, tol=a.tol, seed=a.seed)
        index = {"smallest": 1, "second_largest": dim - 1, "largest": dim}[which]
        payload = {"n": n, "which": which, "index": index, "eigenvalue": lam,
                   "residual": float(np.linalg.norm(op.matvec(vec) - lam * vec))}
        text = f"lambda_{index} = {_fmt(lam)}\n"
        csv_text = f"n,which,index,eigenvalue\n{n},{which},{index},{lam:.6f}\n"
        return payload, text, csv_text, True
    s = spectra.spectral_summary(n, tol=a.tol, seed=a.seed, matrix_free=a.matrix_free, workers=a.workers, op=op)
    payload = s.to_dict(include_vector=a.vector)
    text = (f"lambda_1 = {_fmt(s.lambda_min)}\n"
            f"lambda_{dim - 1} = {_fmt(s.lambda_second_max)}\n"
            f"lambda_{dim} = {_fmt(s.lambda_max)}\n")
    csv_text = spectra.table_to_csv([payload], ("n", "lambda_min", "lambda_second_max", "lambda_max", "total_lis"))
    return payload, text, csv_text, True


def cmd_table(a):
    rows = spectra.ratio_table(a.n_max, tol=a.tol, seed=a.seed, matrix_free=a.matrix_free, workers=a.workers)
    payload = {"rows": rows}
    header = ["n", "lambda_1", "ratio", "lambda_n!-1", "ratio"]
    body = [[r["n"], _fmt(r["lambda_min"]), _fmt(r["lambda_min_ratio"]),
             _fmt(r["lambda_second_max"]), _fmt(r["lambda_second_max_ratio"])] for r in rows]
    return payload, _text_table(header, body), spectra.table_to_csv(rows), True


def cmd_counterexample(a):
    _require(a.n >= 2, "--n must be >= 2")
    res = dist.counterexample(a.n, tol=a.tol, seed=a.seed)
    payload = res.to_dict()
    if res.uniform_optimal:
        text = f"n={a.n}: uniform is optimal (E = {res.expectation_uniform:.4f}); no counterexample\n"
    else:
        text = (f"n={a.n}: lambda_1 = {res.lambda_min:.4f}, c = {res.c:.6g}\n"
                f"E_uniform = {res.expectation_uniform:.4f}\n"
                f"E_P0      = {res.expectation_p0:.4f}\n"
                f"gap       = {res.gap:.6g}\n")
    return payload, text, None, True


def cmd_optimize(a):
    _require(2 <= a.n <= lm.DENSE_LIMIT, f"--n must be in 2..{lm.DENSE_LIMIT}")
    run = opt.minimize(a.n, method=a.method, restarts=a.restarts, iters=a.iters, seed=a.seed,
                       tol=a.opt_tol, workers=a.workers)
    report = opt.conjecture_report(run)
    payload = {"run": run.to_dict(include_distribution=a.vector), "report": report}
    header = ["n", "method", "best", "uniform", "P0", "sqrt(n)", "cbrt(n)", "below_sqrt", "below_cbrt"]
    row = [a.n, run.method, _fmt(run.best_value), _fmt(report["uniform_value"]),
           _fmt(report["counterexample_value"]), _fmt(report["sqrt_n"]), _fmt(report["cbrt_n"]),
           report["below_sqrt_conjecture"], report["below_cbrt_bound"]]
    return payload, _text_table(header, [row]), None, not report["below_cbrt_bound"]


def cmd_sample(a):
    _require(a.pairs >= 2, "--pairs must be >= 2")
    P = _load_distribution(a.dist, a.n, a.seed)
    est, se = dist.mc_expectation(P, a.pairs, seed=a.seed, workers=a.workers)
    payload = {"n": a.n, "dist": a.dist, "pairs": a.pairs, "seed": a.seed, "workers": a.workers,
               "estimate": est, "stderr": se}
    if a.n <= lm.DENSE_LIMIT:
        exact = dist.expectation_exact(P)
        payload["exact"] = exact
        payload["z"] = (est - exact) / se if se > 0 else 0.0
    text = f"E[LCS] ~ {est:.4f} +/- {se:.4f} ({a.pairs} pairs)\n"
    if "exact" in payload:
        text += f"exact    {payload['exact']:.4f}\n"
    return payload, text, None, True


def _verify_reports(a):
    claim = a.claim
    reports = []
    if claim in ("triple", "all"):
        mode = "exhaustive" if a.exhaustive else "auto"
        reports.append(ver.check_triple_product(a.n, mode=mode, sample_count=a.samples, seed=a.seed,
                                                workers=a.workers, allow_n6=a.allow_n6))
    if claim in ("erdos", "all"):
        reports.append(ver.check_erdos_szekeres(a.n))
    if claim in ("spectral", "all"):
        reports.append(ver.check_spectral_claims(min(a.n, 7) if claim == "all" else a.n, tol=a.tol, seed=a.seed))
    if claim in ("blocks", "all") and (claim == "blocks" or a.n + 1 <= lm.DENSE_LIMIT):
        reports.append(ver.check_blocks(a.n))
    if claim in ("cubic", "all"):
        dists = [a.dist] if a.dist else ["uniform", "id"] + (["counterexample"] if a.n >= 4 else [])
        for d in dists:
            r = ver.check_cubic_chain(_load_distribution(d, a.n, a.seed))
            r.details["distribution"] = d
            reports.append(r)
    return reports


def cmd_verify(a):
    reports = _verify_reports(a)
    payload = {"reports": [r.to_dict() for r in reports], "passed": all(r.passed for r in reports)}
    rows = []
    for r in reports:
        w = r.witness
        if isinstance(w, dict):
            w = w.get("perms") or w.get("perm") or w.get("pair") or w.get("check") or w.get("block")
        rows.append([r.claim, r.n, r.mode, r.cases, r.violations, "pass" if r.passed else "FAIL",
                     _fmt(r.slack, 6) if r.slack is not None else "-", json.dumps(w)])
    text = _text_table(["claim", "n", "mode", "cases", "violations", "result", "slack", "witness"], rows)
    return payload, text, None, payload["passed"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--json", action="store_const", const="json", dest="format",
                        help="shorthand for --format json")
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--meta", help="write timing/backend metadata (JSON) here")
    common.add_argument("--workers", type=int, default=None,
                        help="parallelism degree (default: $LCSPERM_WORKERS or CPU count)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=spectra.DEFAULT_TOL)

    p = _Parser(prog="lcsperm", description="LCS matrices over the symmetric group")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("build", parents=[common], help="materialize L^(n) to a matrix file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--allow-large", action="store_true", help="permit n = 8 (about 1.6 GB)")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("eigen", parents=[common], help="extreme eigenvalues of L^(n)")
    s.add_argument("--n", type=int)
    s.add_argument("--which", choices=("smallest", "second-largest", "largest", "all-small-n"))
    s.add_argument("--matrix", help="read L^(n) from a matrix file")
    s.add_argument("--matrix-free", action="store_true", help="matrix-free products (needed for n = 8)")
    s.add_argument("--allow-large", action="store_true")
    s.add_argument("--vector", action="store_true", help="include r_min in JSON output")
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("table", parents=[common], help="eigenvalue growth table with ratio columns")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--matrix-free", action="store_true")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("counterexample", parents=[common], help="build P0 = U + c R_1")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("optimize", parents=[common], help="search for minimizing distributions")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", choices=("pg", "fw"), default="pg")
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--iters", type=int, default=5000)
    s.add_argument("--opt-tol", type=float, default=1e-9, help="stopping tolerance")
    s.add_argument("--vector", action="store_true", help="include the best distribution in JSON output")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("sample", parents=[common], help="Monte-Carlo estimate of E[LCS]")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--dist", required=True, help="uniform, counterexample, id, or a distribution JSON file")
    s.add_argument("--pairs", type=int, required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", parents=[common], help="check the proven inequalities at n")
    s.add_argument("claim", choices=("triple", "erdos", "spectral", "cubic", "blocks", "all"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--allow-n6", action="store_true", help="permit the exhaustive triple scan at n = 6")
    s.add_argument("--samples", type=int, default=10 ** 6)
    s.add_argument("--dist", help="distribution for the cubic chain (default: several)")
    s.set_defaults(func=cmd_verify)
    return p


def _emit(a, payload, text, csv_text):
    if a.format == "json":
        body = _json(payload)
    elif a.format == "csv":
        if csv_text is None:
            raise UsageError(f"{a.command} has no CSV output")
        body = csv_text
    else:
        body = text
    if a.output:
        Path(a.output).write_text(body)
    else:
        sys.stdout.write(body)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.command is None:
            raise UsageError("a subcommand is required")
        if a.workers is None:
            a.workers = default_workers()
        _require(a.workers >= 1, "--workers must be >= 1")
        _require(a.tol > 0, "--tol must be positive")
        started = time.time()
        payload, text, csv_text, ok = a.func(a)
        _emit(a, payload, text, csv_text)
        if a.meta:
            Path(a.meta).write_text(_json({
                "command": a.command, "backend": _backend.BACKEND, "workers": a.workers,
                "started": started, "elapsed_seconds": time.time() - started,
            }))
        if not ok:
            raise ClaimViolation(f"{a.command}: a proven claim failed; see report")
        return EXIT_OK
    except UsageError as e:
        print(f"error: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ClaimViolation, dist.InconsistencyError) as e:
        print(f"error: violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except Exception as e:
        message = str(e).replace("\n", " ")
        print(f"error: runtime: {type(e).__name__}: {message}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
