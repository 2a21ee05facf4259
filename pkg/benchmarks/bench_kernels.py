"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on the same inputs under both backends; outputs must agree
exactly (walks and counts) or to 1e-12 (the cover DP) before timings are
reported.
"""
import argparse
import time

import numpy as np

from covertime.chain import Graph, rw_from_graph
from covertime.kernels import backend


def cycle_with_chords(n, seed=0):
    rng = np.random.default_rng(seed)
    edges = {tuple(sorted((i, (i + 1) % n))) for i in range(n)}
    while len(edges) < 2 * n:
        u, v = sorted(rng.choice(n, 2, replace=False).tolist())
        edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


def cases():
    m = rw_from_graph(cycle_with_chords(200))
    sc = np.zeros(m.n)
    sc[:] = 1.0                      # deterministic start at state 0
    targets = np.arange(0, 200, 5)   # 40 targets
    bit_of = np.full(m.n, -1, dtype=np.int64)
    bit_of[targets] = np.arange(len(targets))
    in_a = np.zeros(m.n, dtype=np.uint8)
    in_a[targets] = 1
    yield "simulate_paths 2000x500", lambda k: k.simulate_paths(
        m.indptr, m.indices, m.cum, sc, 1, 0, 2000, 500)
    yield "cover_flags 20000x400", lambda k: k.cover_flags(
        m.indptr, m.indices, m.cum, sc, 1, 0, 20000, 400, bit_of, (1 << 40) - 1, False)
    yield "distinct_counts 20000x400", lambda k: k.distinct_counts(
        m.indptr, m.indices, m.cum, sc, 1, 0, 20000, 400, in_a)

    small = rw_from_graph(cycle_with_chords(12, seed=1))
    bits = np.arange(small.n, dtype=np.int64)
    init = np.zeros(small.n)
    init[0] = 1.0
    yield "cover_dp n=12 M=60", lambda k: k.cover_dp(
        small.indptr, small.indices, small.probs, init, bits, small.n, 60, False)


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        fast = backend("cython")
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return
    slow = backend("python")
    print(f"{'kernel':28s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, run in cases():
        tf, a = timed(lambda: run(fast), args.repeat)
        ts, b = timed(lambda: run(slow), args.repeat)
        a, b = np.asarray(a), np.asarray(b)
        same = np.allclose(a, b, rtol=0, atol=1e-12) if a.dtype.kind == "f" else np.array_equal(a, b)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:28s} {tf:10.4f} {ts:10.4f} {ts / tf:8.1f}x")


if __name__ == "__main__":
    main()
