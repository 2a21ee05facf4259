import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from oracles import (brute_cover, brute_induced, complete_graph, graph_from_nx, path_graph,
                     random_chain_rows, random_connected, star_graph, walk_probabilities)

from covertime.chain import Graph, MarkovChain, rw_from_graph
from covertime.errors import (BudgetError, DegenerateHorizonError, EscapingMassError,
                              PreconditionError)
from covertime.exact import (avoid_probability, ball_sets, check_return_inequalities,
                             classify_recurrent, cover_probability, degree_split_mass,
                             enumerate_cover, expander_bounds, first_visit_probabilities,
                             heavy_witness, hit_before_return, hitting_stats, induced_chain,
                             induced_exact, induced_matrix, is_eps_expander, return_time_cdf,
                             spectral_gap, transition_power)


# -- transition powers ---------------------------------------------------

def test_power_identity(p3):
    assert transition_power(p3, 1, 0).tolist() == [0, 1, 0]


def test_power_p3_two_steps(p3):
    assert np.allclose(transition_power(p3, 1, 2), [0, 1, 0])


def test_power_k2_parity(k2):
    assert np.allclose(transition_power(k2, 0, 5), [0, 1])
    assert transition_power(k2, 0, 3, exact=True)[1] == 1


# -- induced chains ------------------------------------------------------

def test_induced_full_set_is_chain(k4):
    states, Phi = induced_matrix(k4, range(4))
    assert np.allclose(Phi, k4.dense())


def test_induced_p3_ends(p3):
    _, Phi = induced_matrix(p3, [0, 2])
    assert np.allclose(Phi, [[0.5, 0.5], [0.5, 0.5]])


def test_induced_k3_pair(k3):
    ex = induced_exact(k3, [0, 1])
    assert ex[1][0][1] == Fraction(3, 4) and ex[1][0][0] == Fraction(1, 4)


def test_induced_escaping_mass():
    m = MarkovChain(3, [[(1, 1.0)], [(2, 1.0)], [(2, 1.0)]])
    with pytest.raises(EscapingMassError):
        induced_matrix(m, [0, 1])


def test_induced_chain_object(p3):
    ic = induced_chain(p3, [0, 2])
    assert ic.n == 2 and np.allclose(ic.dense(), 0.5)


def test_induced_matches_series_and_balance():
    rng = np.random.default_rng(7)
    for _ in range(40):
        g = random_connected(int(rng.integers(3, 10)), 0.5, rng)
        m = rw_from_graph(g)
        k = int(rng.integers(1, g.n + 1))
        W = sorted(rng.choice(g.n, k, replace=False).tolist())
        states, Phi = induced_matrix(m, W)
        assert np.allclose(Phi.sum(axis=1), 1, atol=1e-9)
        assert np.allclose(Phi, brute_induced(m, W), atol=1e-9)
        pi = m.stationary[W] / m.stationary[W].sum()
        F = pi[:, None] * Phi
        assert np.allclose(F, F.T, atol=1e-9)


def test_induced_nested_sets_counterexample(p3):
    # watching more states can only lower a transition between two of them
    _, small = induced_matrix(p3, [0, 2])
    _, big = induced_matrix(p3, [0, 1, 2])
    assert small[0, 1] == pytest.approx(0.5) and big[0, 2] == 0.0


def test_induced_monotone_in_nested_sets():
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = random_connected(int(rng.integers(4, 10)), 0.45, rng)
        m = rw_from_graph(g)
        big = sorted(rng.choice(g.n, int(rng.integers(2, g.n + 1)), replace=False).tolist())
        small = sorted(rng.choice(big, int(rng.integers(2, len(big) + 1)), replace=False).tolist())
        _, Pb = induced_matrix(m, big)
        _, Ps = induced_matrix(m, small)
        ib = {v: i for i, v in enumerate(big)}
        for a, v in enumerate(small):
            for b, w in enumerate(small):
                if v != w:
                    assert Pb[ib[v], ib[w]] <= Ps[a, b] + 1e-12


# -- cover ---------------------------------------------------------------

def test_cover_k2(k2):
    assert cover_probability(k2, 0, [0, 1], 1, include_start=True) == 1.0


def test_cover_p3_examples(p3):
    assert cover_probability(p3, 1, range(3), 2, include_start=True, exact=True) == 0
    assert cover_probability(p3, 1, range(3), 3, include_start=True, exact=True) == Fraction(1, 2)
    assert cover_probability(p3, 1, range(3), 3, include_start=True) == pytest.approx(0.5,
                                                                                      abs=1e-15)


def test_cover_budget(k4):
    with pytest.raises(BudgetError):
        cover_probability(rw_from_graph(path_graph(30)), 0, range(30), 10)
    assert cover_probability(k4, 0, [], 0) == 1.0


def test_cover_distribution_start(p3):
    p = cover_probability(p3, [0.5, 0, 0.5], range(3), 4, include_start=False)
    q = 0.5 * cover_probability(p3, 0, range(3), 4) + 0.5 * cover_probability(p3, 2, range(3), 4)
    assert p == pytest.approx(q, abs=1e-15)


def test_cover_small_graphs_vs_brute():
    atlas = [graph_from_nx(g) for g in nx.graph_atlas_g()[1:20] if nx.is_connected(g)
             and g.number_of_nodes() >= 2]
    for g in atlas:
        m = rw_from_graph(g)
        for s in range(g.n):
            for M in range(0, 6):
                for inc in (False, True):
                    b = brute_cover(g, s, range(g.n), M, inc)
                    assert cover_probability(m, s, range(g.n), M, inc, exact=True) == b
                    assert abs(cover_probability(m, s, range(g.n), M, inc) - float(b)) <= 1e-12


def test_cover_monotone_in_horizon():
    rng = np.random.default_rng(2)
    for _ in range(15):
        g = random_connected(int(rng.integers(3, 8)), 0.5, rng)
        m = rw_from_graph(g)
        W = rng.choice(g.n, int(rng.integers(1, g.n + 1)), replace=False).tolist()
        vals = [cover_probability(m, 0, W, M) for M in range(12)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_enumerate_cover_agrees(p3):
    assert enumerate_cover(p3, 1, range(3), 3, include_start=True) == Fraction(1, 2)


# -- hitting, balls, recurrence -----------------------------------------

def test_hitting_p3(p3):
    rep = hitting_stats(p3, 0, [2], 2)
    assert rep.before_return[2] == pytest.approx(0.5)
    assert sum(rep.hit_dist) == pytest.approx(1.0)


def test_hitting_source_in_targets(p3):
    rep = hitting_stats(p3, 0, [0, 2], 3)
    assert rep.hit_dist[0] == 1.0
    assert sum(rep.hit_plus_dist) == pytest.approx(1.0)


def test_hitting_k2(k2):
    assert hitting_stats(k2, 0, [1], 1).before_return[1] == 1.0


def test_ball_sets_p3(p3):
    b = ball_sets(p3, 1, 1, 0.6)
    assert b.B == b.Bprime == frozenset({0, 2})
    assert ball_sets(p3, 1, 5, 1.999).B <= frozenset({0, 2})


def test_ball_sets_threshold_two(p3):
    b = ball_sets(p3, 1, 2, 2.0)
    assert b.B == b.Bprime == frozenset()
    with pytest.raises(PreconditionError):
        ball_sets(p3, 1, 2, 0.0)


def test_bprime_inside_b():
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = MarkovChain.from_fractions(random_chain_rows(int(rng.integers(2, 8)), rng))
        b = ball_sets(m, int(rng.integers(m.n)), int(rng.integers(1, 6)), float(rng.uniform(0.05, 1.9)))
        assert b.Bprime <= b.B and b.center not in b.B


def test_ball_symmetry_by_degree():
    rng = np.random.default_rng(9)
    for _ in range(40):
        g = random_connected(int(rng.integers(3, 10)), 0.4, rng)
        m = rw_from_graph(g)
        R = int(rng.integers(1, 8))
        d = float(rng.uniform(0.05, 1.0))
        balls = [ball_sets(m, v, R, d) for v in range(g.n)]
        deg = g.degrees
        for v in range(g.n):
            for w in range(g.n):
                if v != w and deg[w] >= deg[v] and v in balls[w].Bprime:
                    assert w in balls[v].Bprime


def test_recurrence_examples(k2, p3):
    assert classify_recurrent(k2, 0.1, 2) == {0, 1}
    assert 0 not in classify_recurrent(p3, 0.1, 2)
    # a long horizon makes every state recurrent on a connected walk
    m = rw_from_graph(random_connected(8, 0.5, np.random.default_rng(0)))
    assert classify_recurrent(m, 0.01, 400) == set(range(8))


def test_return_cdf_forward_vs_spectral():
    m = rw_from_graph(random_connected(9, 0.4, np.random.default_rng(4)))
    hs = [1, 2, 5, 17, 40]
    fwd = return_time_cdf(m, hs)
    from covertime.exact import _no_return_tail
    spec = np.array([1 - _no_return_tail(m, v, hs) for v in range(m.n)])
    assert np.allclose(fwd, spec, atol=1e-10)


def test_first_visit_targets_subset():
    m = rw_from_graph(random_connected(8, 0.5, np.random.default_rng(1)))
    full = first_visit_probabilities(m, 0, 6, kill_return=True)
    part = first_visit_probabilities(m, 0, 6, kill_return=True, targets=[2, 5])
    assert np.allclose(part[[2, 5]], full[[2, 5]])


def test_first_visit_vs_enumeration(p3):
    paths = walk_probabilities(p3, 0, 4)
    want = sum(p for path, p in paths if 2 in path[1:] and
               (0 not in path[1:] or path[1:].index(2) < path[1:].index(0)))
    assert first_visit_probabilities(p3, 0, 4, kill_return=True)[2] == pytest.approx(want)


def test_avoid_probability(p3):
    assert np.allclose(avoid_probability(p3, [2], 2), [0.5, 0.5, 0.5])


def test_hit_before_return_tree():
    g = path_graph(5)
    assert hit_before_return(rw_from_graph(g), 0, 4) == pytest.approx(0.25)


# -- return-time inequalities ------------------------------------------

def test_return_inequalities_k2(k2):
    r = check_return_inequalities(k2, 0, 1, 1, 1)
    assert r.lhs_af == 0 and r.rhs_af == pytest.approx(2) and r.pass_af and r.pass_mono
    assert r.mono_chain[0] == 1.0


def test_return_inequalities_nonreversible():
    m = MarkovChain(3, [[(1, 0.9), (2, 0.1)], [(2, 0.9), (0, 0.1)], [(0, 0.9), (1, 0.1)]])
    with pytest.raises(PreconditionError):
        check_return_inequalities(m, 0, 1, 1, 1)


def test_return_inequality_normalization(star5):
    # leaf 1 to center 0 in one step: p/pi_w = 1/(1/2) = 2, rhs = sqrt(10 * 2)
    r = check_return_inequalities(rw_from_graph(star5), 1, 0, 0, 1)
    assert r.lhs_af == pytest.approx(2) and r.rhs_af == pytest.approx(math.sqrt(20))
    assert r.pass_af
    # dividing by the leaf's pi instead gives 10 > sqrt(20)
    assert r.lhs_pi_v == pytest.approx(10) and not r.pass_pi_v


# -- spectra -------------------------------------------------------------

def test_spectrum_k4(k4):
    rep = spectral_gap(k4)
    assert np.allclose(rep.eigenvalues, [1, -1 / 3, -1 / 3, -1 / 3])
    assert is_eps_expander(rep, 0.66) and not is_eps_expander(rep, 2 / 3 + 1e-9)


def test_spectrum_bipartite(p3, k2):
    assert np.allclose(spectral_gap(p3).eigenvalues, [1, 0, -1], atol=1e-12)
    assert not is_eps_expander(spectral_gap(p3), 1e-6)
    assert not is_eps_expander(spectral_gap(k2), 1e-6)


def test_spectrum_range():
    rng = np.random.default_rng(0)
    for _ in range(20):
        rep = spectral_gap(rw_from_graph(random_connected(int(rng.integers(3, 20)), 0.3, rng)))
        lam = np.array(rep.eigenvalues)
        assert abs(lam[0] - 1) < 1e-9 and np.all(np.abs(lam) <= 1 + 1e-9)


def test_expander_bounds_k4(k4):
    b = expander_bounds(k4, [0], 2, 0.66)
    assert b.max_deviation == pytest.approx(1 / 12)
    assert b.tail_ok and b.hitting_ok
    b0 = expander_bounds(k4, [0], 0, 0.66)
    assert b0.hitting_bound == 1.0 and b0.hitting_ok


def test_expander_hitting_smooth_exponent():
    # C8 plus chords is an expander where vertex 4 is out of one-step reach of 0
    g = Graph.from_edges(8, sorted({tuple(sorted(e)) for e in
                                    [(i, (i + 1) % 8) for i in range(8)] + [(0, 2), (0, 6)]}))
    m = rw_from_graph(g)
    rep = spectral_gap(m)
    b = expander_bounds(m, [4], 1, 0.5 * (1 - rep.gap_quantity), rep)
    assert b.exact_tail[0] == 1.0
    assert b.hitting_bound == 1.0 and b.hitting_ok
    assert b.hitting_bound_smooth < 1.0 and not b.hitting_smooth_ok


def test_expander_bounds_reject(p3):
    with pytest.raises(PreconditionError):
        expander_bounds(p3, [0], 2, 0.1)


# -- degree split ------------------------------------------------------

def test_heavy_witness_star():
    g = star_graph(5)
    with pytest.raises(DegenerateHorizonError):
        heavy_witness(g, 4, 1)
    hw = heavy_witness(g, 4, 1, horizon=1)
    assert hw.B == (0,) and hw.W == () and hw.hit_probability[0] == 1.0
    assert not hw.half_B_met


def test_heavy_witness_empty_B():
    hw = heavy_witness(path_graph(5), 4, 1, horizon=2)
    assert hw.B == () and hw.W == ()


def test_degree_split_mass_random():
    rng = np.random.default_rng(6)
    for _ in range(30):
        g = random_connected(int(rng.integers(5, 14)), 0.4, rng)
        deg = g.degrees
        D = float(rng.integers(2, max(3, deg.max()) + 1))
        d = float(rng.integers(1, D + 1))
        for t in range(0, 8):
            lhs, rhs = degree_split_mass(g, D, d, t)
            assert lhs <= rhs + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_cover_rational_equals_float(seed):
    rng = np.random.default_rng(seed)
    g = random_connected(int(rng.integers(2, 7)), 0.5, rng)
    m = rw_from_graph(g)
    W = rng.choice(g.n, int(rng.integers(0, g.n + 1)), replace=False).tolist()
    M = int(rng.integers(0, 7))
    s = int(rng.integers(g.n))
    a = cover_probability(m, s, W, M, exact=True)
    assert abs(float(a) - cover_probability(m, s, W, M)) <= 1e-12
