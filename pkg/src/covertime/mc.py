"""Seeded Monte Carlo for walks, cover events and distinct-visit counts.

Replication ``r`` of a run with master seed ``s`` draws its uniforms from a
counter hash of ``(s, r, step)``, so results do not depend on how the
replications are split across threads. Aggregation is over integer counts.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .chain import MarkovChain, StartRule, WalkTrace
from .errors import PreconditionError, UsageError

Z99 = 2.5758293035489004
# cover flags are packed into int64 masks; larger W falls back to full paths
MASK_BITS = 62
_PATH_CHUNK = 4096


def default_threads() -> int:
    raw = os.environ.get("COVERTIME_THREADS", "")
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"COVERTIME_THREADS={raw!r} is not an integer") from None
    return max(1, k)


def wilson(successes: int, reps: int, z: float = Z99) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if reps <= 0:
        raise PreconditionError("reps must be positive")
    p = successes / reps
    z2 = z * z
    denom = 1.0 + z2 / reps
    center = (p + z2 / (2 * reps)) / denom
    half = z * math.sqrt(p * (1 - p) / reps + z2 / (4 * reps * reps)) / denom
    lo, hi = max(0.0, center - half), min(1.0, center + half)
    # guard the invariant lo <= p <= hi against rounding at p in {0, 1}
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    reps: int
    lo: float
    hi: float
    seed: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, reps: int, seed: int) -> "Estimate":
        lo, hi = wilson(successes, reps)
        return cls(successes / reps, reps, lo, hi, int(seed), int(successes))

    def contains(self, p: float) -> bool:
        return self.lo <= p <= self.hi

    def to_dict(self):
        return {"p_hat": self.p_hat, "reps": self.reps, "lo": self.lo, "hi": self.hi,
                "seed": self.seed, "successes": self.successes}


def _start_cum(start: StartRule, n: int) -> np.ndarray:
    c = np.minimum(np.cumsum(start.vector(n)), 1.0)
    # last positive entry absorbs rounding so every u in [0,1) maps to a state
    last = int(np.flatnonzero(start.vector(n) > 0)[-1])
    c[last:] = 1.0
    return c


def _chunks(reps: int, threads: int) -> list:
    k = max(1, min(int(threads), reps))
    size = -(-reps // k)
    return [(a, min(size, reps - a)) for a in range(0, reps, size)]


def _parallel(fn, reps: int, threads) -> list:
    threads = default_threads() if threads is None else max(1, int(threads))
    parts = _chunks(reps, threads)
    if len(parts) == 1:
        return [fn(*parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as ex:
        return list(ex.map(lambda p: fn(*p), parts))


def simulate_paths(m: MarkovChain, start, steps: int, seed: int = 0,
                   reps: int = 1, rep0: int = 0, threads=None) -> np.ndarray:
    """``reps`` walks as an int64 array of shape ``(reps, steps + 1)``."""
    if steps < 0:
        raise PreconditionError("steps must be nonnegative")
    start = StartRule.coerce(start)
    sc = _start_cum(start, m.n)

    def run(a, k):
        return kernels.simulate_paths(m.indptr, m.indices, m.cum, sc, int(seed),
                                      rep0 + a, k, int(steps))

    return np.concatenate(_parallel(run, reps, threads), axis=0)


def simulate_walk(m: MarkovChain, start, steps: int, seed: int = 0,
                  replication: int = 0) -> WalkTrace:
    """One walk ``X_0..X_steps``; a pure function of its arguments."""
    path = simulate_paths(m, start, steps, seed, 1, rep0=replication, threads=1)[0]
    return WalkTrace(tuple(int(x) for x in path), int(seed), m.chain_id, int(replication))


def estimate_cover(m: MarkovChain, start, W: Iterable[int], horizon: int, reps: int,
                   seed: int = 0, include_start: bool = False, threads=None) -> Estimate:
    """Fraction of walks with ``X_[M] ⊇ W`` and its 99% Wilson interval."""
    if reps < 1:
        raise PreconditionError("reps must be at least 1")
    if horizon < 0:
        raise PreconditionError("horizon must be nonnegative")
    start = StartRule.coerce(start)
    targets = sorted({int(w) for w in W})
    if not targets:
        return Estimate.from_counts(reps, reps, seed)
    sc = _start_cum(start, m.n)
    k = len(targets)
    if k <= MASK_BITS:
        bit_of = np.full(m.n, -1, dtype=np.int64)
        bit_of[targets] = np.arange(k)
        full = (1 << k) - 1

        def run(a, c):
            flags = kernels.cover_flags(m.indptr, m.indices, m.cum, sc, int(seed), a, c,
                                        int(horizon), bit_of, full, bool(include_start))
            return int(np.asarray(flags, dtype=np.int64).sum())
    else:
        in_w = np.zeros(m.n, dtype=bool)
        in_w[targets] = True

        def run(a, c):
            hits = 0
            for b in range(a, a + c, _PATH_CHUNK):
                cnt = min(_PATH_CHUNK, a + c - b)
                paths = kernels.simulate_paths(m.indptr, m.indices, m.cum, sc, int(seed),
                                               b, cnt, int(horizon))
                body = paths if include_start else paths[:, 1:]
                for row in body:
                    hits += int(in_w[np.unique(row)].sum() == k)
            return hits

    return Estimate.from_counts(sum(_parallel(run, reps, threads)), reps, seed)


@dataclass(frozen=True)
class VisitStats:
    """Distinct-visit counts ``|X_[R] ∩ A|`` over replications."""

    horizon: int
    A: tuple
    histogram: tuple      # histogram[c] = replications with count c
    mean: float
    below: dict           # q -> Estimate of Pr(count < q)

    def to_dict(self):
        return {"horizon": self.horizon, "A": list(self.A), "histogram": list(self.histogram),
                "mean": self.mean,
                "below": {str(q): e.to_dict() for q, e in self.below.items()}}


def visit_counts(m: MarkovChain, start, R: int, A: Iterable[int], reps: int,
                 seed: int = 0, threads=None) -> np.ndarray:
    """Per-replication ``|X_[R] ∩ A|`` (X_0 excluded)."""
    if reps < 1:
        raise PreconditionError("reps must be at least 1")
    start = StartRule.coerce(start)
    sc = _start_cum(start, m.n)
    in_a = np.zeros(m.n, dtype=np.uint8)
    in_a[sorted({int(a) for a in A})] = 1

    def run(a, c):
        return np.asarray(kernels.distinct_counts(m.indptr, m.indices, m.cum, sc, int(seed),
                                                  a, c, int(R), in_a))

    return np.concatenate(_parallel(run, reps, threads))


def estimate_visit_stats(m: MarkovChain, start, R: int, A: Iterable[int], reps: int,
                         seed: int = 0, thresholds: Sequence[float] = (),
                         threads=None) -> VisitStats:
    A = tuple(sorted({int(a) for a in A}))
    counts = visit_counts(m, start, R, A, reps, seed, threads)
    top = min(int(R), len(A))
    hist = np.bincount(counts, minlength=top + 1)
    below = {q: Estimate.from_counts(int((counts < q).sum()), reps, seed) for q in thresholds}
    return VisitStats(int(R), A, tuple(int(h) for h in hist), float(counts.mean()), below)


@dataclass(frozen=True)
class TailCheck:
    frequency: float
    bound: float
    stderr: float
    passed: bool

    def to_dict(self):
        return {"frequency": self.frequency, "bound": self.bound,
                "stderr": self.stderr, "pass": self.passed}


def empirical_tail_vs_bound(samples, center: float, radius: float, bound: float) -> TailCheck:
    """Compare ``Pr(|X - center| > radius)`` with a claimed bound.

    The standard error is the binomial one at the bound itself (clipped to
    [0, 1]), i.e. the spread expected if the bound were attained.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise PreconditionError("samples must be nonempty")
    freq = float(np.mean(np.abs(x - center) > radius))
    b = min(max(bound, 0.0), 1.0)
    se = math.sqrt(b * (1 - b) / x.size)
    return TailCheck(freq, float(bound), se, bool(freq <= bound + 3 * se))


def stream_uniforms(seed: int, replication: int, count: int) -> np.ndarray:
    """``count`` uniforms from the stream of one replication (steps 0..count-1)."""
    key = kernels.stream_keys(seed, [replication])[0]
    steps = np.arange(count, dtype=np.uint64)
    return _fallback_uniforms(key, steps)


def _fallback_uniforms(key, steps):
    from ._fallback import _GOLDEN, _INV53, _mix
    with np.errstate(over="ignore"):
        z = _mix(np.uint64(key) + (steps + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53
