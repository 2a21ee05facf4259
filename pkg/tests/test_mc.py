import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from oracles import complete_graph, path_graph, random_connected

from covertime import kernels
from covertime.chain import rw_from_graph
from covertime.errors import PreconditionError, UsageError
from covertime.exact import cover_probability
from covertime.mc import (Estimate, Z99, default_threads, empirical_tail_vs_bound,
                          estimate_cover, estimate_visit_stats, simulate_paths,
                          simulate_walk, stream_uniforms, visit_counts, wilson)


def test_walk_zero_steps(p3):
    assert simulate_walk(p3, 1, 0).states == (1,)


def test_walk_determinism(p3):
    a = simulate_walk(p3, 1, 50, seed=9, replication=3)
    b = simulate_walk(p3, 1, 50, seed=9, replication=3)
    assert a == b
    assert simulate_walk(p3, 1, 50, seed=10, replication=3) != a


def test_one_step_law(p3):
    paths = simulate_paths(p3, 1, 1, seed=0, reps=100_000)
    for v, p in [(0, 0.5), (1, 0.0), (2, 0.5)]:
        e = Estimate.from_counts(int((paths[:, 1] == v).sum()), 100_000, 0)
        assert e.contains(p)


def test_thread_count_irrelevant(k4):
    a = estimate_cover(k4, 0, range(4), 6, 20_000, seed=3, threads=1)
    b = estimate_cover(k4, 0, range(4), 6, 20_000, seed=3, threads=4)
    assert a == b
    pa = simulate_paths(k4, 0, 10, seed=1, reps=300, threads=1)
    pb = simulate_paths(k4, 0, 10, seed=1, reps=300, threads=3)
    assert np.array_equal(pa, pb)


def test_cover_examples(k2, p3, k4):
    assert estimate_cover(k2, 0, [0, 1], 1, 1000, include_start=True).p_hat == 1.0
    e = estimate_cover(p3, 1, range(3), 3, 100_000, seed=0, include_start=True)
    assert e.contains(0.5)
    assert estimate_cover(k4, 0, [], 3, 10).p_hat == 1.0


def test_cover_large_target_set_fallback():
    g = path_graph(70)
    m = rw_from_graph(g)
    e = estimate_cover(m, 0, range(70), 30, 50, seed=0)
    assert e.p_hat == 0.0  # 30 steps cannot reach vertex 69
    e2 = estimate_cover(m, 0, range(0, 66, 1), 2000, 20, seed=0)
    assert 0 <= e2.p_hat <= 1


def test_cover_mc_vs_exact_random():
    rng = np.random.default_rng(0)
    for i in range(8):
        g = random_connected(int(rng.integers(3, 7)), 0.5, rng)
        m = rw_from_graph(g)
        W = list(range(g.n))
        exact = cover_probability(m, 0, W, 8)
        assert estimate_cover(m, 0, W, 8, 40_000, seed=i).contains(exact)


def test_visit_stats_bounds(p3, k4):
    st_ = estimate_visit_stats(p3, 1, 1, range(3), 1000, seed=0)
    assert st_.histogram[1] == 1000
    counts = visit_counts(k4, 0, 5, [1, 2], 2000, seed=2)
    assert counts.max() <= min(5, 2)


def test_visit_stats_k4_exact(k4):
    # exact law of |{X_1, X_2, X_3}| from 0 by enumerating the 27 walks
    law = np.zeros(4)
    for w in itertools.product(range(4), repeat=3):
        path = (0,) + w
        if any(a == b for a, b in zip(path, path[1:])):
            continue
        law[len(set(w))] += 1
    law /= law.sum()
    reps = 50_000
    st_ = estimate_visit_stats(k4, 0, 3, range(4), reps, seed=1, thresholds=(2, 3))
    for c in range(4):
        k = st_.histogram[c] if c < len(st_.histogram) else 0
        assert Estimate.from_counts(k, reps, 1).contains(law[c])
    assert st_.below[3].contains(law[:3].sum())


def test_wilson_properties():
    lo, hi = wilson(0, 100)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = wilson(100, 100)
    assert hi == 1.0 and lo > 0.9
    w1 = np.subtract(*wilson(50, 100)[::-1])
    w2 = np.subtract(*wilson(5000, 10000)[::-1])
    assert w2 < w1 / 5
    assert Z99 == pytest.approx(2.5758293035489004)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6), st.data())
def test_wilson_contains_point(reps, data):
    k = data.draw(st.integers(0, reps))
    lo, hi = wilson(k, reps)
    assert 0 <= lo <= k / reps <= hi <= 1


def test_tail_vs_bound():
    chk = empirical_tail_vs_bound([3.0] * 10, 3.0, 0.1, 0.0)
    assert chk.frequency == 0.0 and chk.passed
    assert empirical_tail_vs_bound([0.0, 10.0], 5.0, 1.0, 1.5).passed
    assert not empirical_tail_vs_bound([0.0] * 100, 5.0, 1.0, 0.01).passed
    with pytest.raises(PreconditionError):
        empirical_tail_vs_bound([], 0, 1, 1)


def test_default_threads(monkeypatch):
    monkeypatch.setenv("COVERTIME_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("COVERTIME_THREADS", "x")
    with pytest.raises(UsageError):
        default_threads()
    monkeypatch.delenv("COVERTIME_THREADS")
    assert default_threads() == 1


def test_reps_validation(p3):
    with pytest.raises(PreconditionError):
        estimate_cover(p3, 0, [1], 3, 0)


def test_stream_uniforms_range():
    u = stream_uniforms(4, 2, 10_000)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.02
    assert np.array_equal(u, stream_uniforms(4, 2, 10_000))


# -- compiled vs fallback kernels --------------------------------------

def _backends():
    try:
        return kernels.backend("cython"), kernels.backend("python")
    except ImportError:
        pytest.skip("compiled kernels not built")


def test_backends_identical_streams():
    fast, slow = _backends()
    keys = np.arange(5, dtype=np.uint64)
    assert np.array_equal(fast.stream_keys(7, keys), slow.stream_keys(7, keys))
    k = slow.stream_keys(7, keys)
    for step in (0, 1, 99):
        assert np.array_equal(fast.uniforms(k, step), slow.uniforms(k, step))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_backends_identical_kernels(seed):
    fast, slow = _backends()
    rng = np.random.default_rng(seed)
    m = rw_from_graph(random_connected(int(rng.integers(2, 12)), 0.5, rng))
    sc = np.cumsum(np.full(m.n, 1.0 / m.n))
    sc[-1] = 1.0
    steps = int(rng.integers(0, 30))
    args = (m.indptr, m.indices, m.cum, sc, seed, 3, 40, steps)
    assert np.array_equal(fast.simulate_paths(*args), slow.simulate_paths(*args))
    k = int(rng.integers(1, m.n + 1))
    bit_of = np.full(m.n, -1, dtype=np.int64)
    bit_of[:k] = np.arange(k)
    for inc in (False, True):
        a = fast.cover_flags(*args, bit_of, (1 << k) - 1, inc)
        b = slow.cover_flags(*args, bit_of, (1 << k) - 1, inc)
        assert np.array_equal(np.asarray(a), np.asarray(b))
    in_a = (rng.random(m.n) < 0.5).astype(np.uint8)
    assert np.array_equal(np.asarray(fast.distinct_counts(*args, in_a)),
                          np.asarray(slow.distinct_counts(*args, in_a)))
    init = np.zeros(m.n)
    init[0] = 1.0
    for inc in (False, True):
        x = fast.cover_dp(m.indptr, m.indices, m.probs, init, bit_of, k, steps, inc)
        y = slow.cover_dp(m.indptr, m.indices, m.probs, init, bit_of, k, steps, inc)
        assert abs(x - y) <= 1e-12


def test_backend_env_switch():
    import subprocess
    import sys
    code = "import covertime.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"COVERTIME_PURE_PYTHON": "1", "PATH": ""}).stdout.strip()
    assert out == "python"
