#!/usr/bin/env python3
"""Compiled simplex kernel vs the NumPy fallback.

Times the raw balanced-transport solve and a full partial fused solve at
several sizes. Run after building the extension:

    python benchmarks/bench_backends.py
"""

import time

import numpy as np

from topotrack.network import MeasureNetwork
from topotrack.transport import SolverParams, solve_pfgw
from topotrack.transport.lp import backend_name, solve_transport, solve_transport_python


def rand_net(rng, n):
    p = rng.random(n) + 0.2
    p /= p.sum()
    W = rng.random((n, n))
    return MeasureNetwork(p=p, W=(W + W.T) / 2, attrs=rng.random((n, 2)))


def time_fn(fn, reps):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"active backend: {backend_name()}\n")

    print("balanced transport LP (cold start, best of N)")
    print(f"{'n':>5} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for n in (20, 40, 60, 100, 160):
        a = rng.random(n) + 1e-3
        a /= a.sum()
        b = rng.random(n) + 1e-3
        b /= b.sum()
        cost = rng.random((n, n)) * 5
        reps = 10 if n <= 60 else 3
        tc = time_fn(lambda: solve_transport(a, b, cost), reps)
        tp = time_fn(lambda: solve_transport_python(a, b, cost), max(reps // 2, 1))
        print(f"{n:>5} {tc * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms {tp / tc:>8.1f}x")

    print("\npartial fused solve (alpha=0.1, m=0.9)")
    print(f"{'n':>5} {'compiled':>12} {'python':>12} {'speedup':>9}")
    import topotrack.transport.lp as lp

    for n in (20, 40, 60):
        na, nb = rand_net(rng, n), rand_net(rng, n - 2)
        params = SolverParams(alpha=0.1, m=0.9)

        def run():
            solve_pfgw(na, nb, params)

        lp._BACKEND = "compiled" if lp._simplex is not None else "python"
        tc = time_fn(run, 5)
        lp._BACKEND = "python"
        tp = time_fn(run, 2)
        lp._BACKEND = "compiled" if lp._simplex is not None else "python"
        print(f"{n:>5} {tc * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms {tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
