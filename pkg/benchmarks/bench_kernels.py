"""Time the compiled kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each row reports the best of ``--repeat`` wall-clock timings per backend
and checks that both backends return identical results.
"""

import argparse
import time

import numpy as np

from lcsperm import _backend
from lcsperm import matrix as lm


def _best(fn, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t)
    return best, result


def _cases(quick):
    rng = np.random.default_rng(0)
    pairs = 10 ** 5 if quick else 10 ** 6
    a = (np.argsort(rng.random((pairs, 8)), axis=1) + 1).astype(np.uint8)
    b = (np.argsort(rng.random((pairs, 8)), axis=1) + 1).astype(np.uint8)
    v5 = rng.standard_normal(120)
    v7 = rng.standard_normal(5040)

    def lcs_pairs(k):
        out = np.empty(pairs, dtype=np.int64)
        k.lcs_pairs(a, b, out)
        return out

    yield f"lcs_pairs n=8 x{pairs}", lcs_pairs
    yield "build_dense n=6", lambda k: lm.build_dense(6, workers=1, kernels=k).entries
    if not quick:
        yield "build_dense n=7", lambda k: lm.build_dense(7, workers=1, kernels=k).entries
    yield "matvec_free n=5", lambda k: lm.MatrixFreeOperator(5, workers=1, kernels=k).matvec(v5)
    if not quick:
        yield "matvec_free n=7", lambda k: lm.MatrixFreeOperator(7, workers=1, kernels=k).matvec(v7)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--quick", action="store_true", help="smaller inputs, skips the n=7 cases")
    a = p.parse_args()

    names = _backend.available()
    backends = {name: _backend.load(name) for name in names}
    print(f"{'case':<26}" + "".join(f"{n:>12}" for n in names) + ("    speedup" if len(names) == 2 else ""))
    for label, fn in _cases(a.quick):
        times, results = [], []
        for name in names:
            t, r = _best(lambda: fn(backends[name]), a.repeat)
            times.append(t)
            results.append(r)
        if len(results) == 2 and not np.allclose(results[0], results[1], rtol=0, atol=1e-9):
            raise SystemExit(f"backends disagree on {label}")
        line = f"{label:<26}" + "".join(f"{t:>11.3f}s" for t in times)
        if len(times) == 2:
            line += f"  {times[1] / times[0]:>8.1f}x"
        print(line, flush=True)


if __name__ == "__main__":
    main()
