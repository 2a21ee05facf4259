import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from oracles import complete_graph, graph_from_nx, path_graph, random_connected, random_tree
from suites import tree_suite

from covertime.chain import rw_from_graph
from covertime.errors import (NotATreeError, ParseError, PreconditionError, StructuralError)
from covertime.partition import (Partition, choose_scale, corp_from_tree, expander_horizon,
                                 expander_partition, far_bound, generic_partition,
                                 good_by_observation, good_vertices, greedy_coloring, is_good,
                                 max_offdiag, min_N, random_blocks, recurrent_partition,
                                 tree_safe_partition, u_set, verify_corp)
from covertime.partition.generic import schedule


# -- structure -----------------------------------------------------------

def test_partition_rejects_overlap():
    with pytest.raises(StructuralError):
        Partition.build(3, [[0, 1], [1, 2]])
    with pytest.raises(StructuralError):
        Partition.build(3, [[0, 1]], U=[[2]])
    with pytest.raises(StructuralError):
        Partition.build(2, [[0, 5]])


def test_partition_json_roundtrip(tmp_path):
    p = Partition.build(5, [[0, 2], [4]], U=[[2], [4]], provenance={"construction": "x"})
    p.save(tmp_path / "p.json")
    q = Partition.load(tmp_path / "p.json")
    assert q == p and q.V0 == (1, 3) and q.provenance == p.provenance
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ParseError):
        Partition.load(tmp_path / "bad.json")
    with pytest.raises(ParseError):
        Partition.from_dict({"blocks": []})


# -- goodness ------------------------------------------------------------

def test_is_good_examples(p3, k4):
    assert is_good(p3, 0, [0, 2], 0.6)
    assert not is_good(p3, 0, [0, 2], 0.5)
    assert is_good(k4, 1, [1], 0.01)
    with pytest.raises(StructuralError):
        is_good(p3, 1, [0, 2], 0.5)
    assert good_vertices(p3, [0, 2], 0.6) == {0, 2}


def test_good_by_observation_examples(p3):
    # from 0 the walk reaches 2 before returning with probability 1/2 within 2 steps
    assert not good_by_observation(p3, 0, [0, 2], 2, 0.5)
    assert good_by_observation(p3, 0, [0, 2], 2, 1.5)


def test_good_by_observation_implies_good():
    rng = np.random.default_rng(3)
    certified = 0
    for _ in range(500):
        g = random_connected(int(rng.integers(3, 10)), 0.35, rng)
        m = rw_from_graph(g)
        W = sorted(rng.choice(g.n, int(rng.integers(1, g.n + 1)), replace=False).tolist())
        v = int(rng.choice(W))
        R = int(rng.integers(1, 12))
        delta = float(rng.uniform(0.1, 1.5))
        if good_by_observation(m, v, W, R, delta):
            certified += 1
            assert is_good(m, v, W, delta)
    assert certified > 20


def test_u_set_column_condition(p3):
    assert u_set(p3, [0, 2], 0.6) == (0, 2)
    assert u_set(p3, [0, 2], 0.5) == ()
    assert u_set(p3, [1], 0.1) == (1,)


# -- verifier ------------------------------------------------------------

def test_verify_everything_in_v0(k4):
    rep = verify_corp(k4, Partition.build(4, []), 2.0, 0.1)
    assert not rep.v0_ok and not rep.passed
    assert rep.sizes_ok and rep.u_ok and rep.induced_ok


def test_verify_callable_threshold(k4):
    p = Partition.build(4, [[0, 1, 2, 3]])
    rep = verify_corp(k4, p, 2.0, 0.1, gamma=0.5, delta_fun=lambda a, g: 1 / a)
    assert rep.threshold == pytest.approx(1 / 8)
    assert not rep.induced_ok
    assert verify_corp(k4, p, 2.0, 0.1, gamma=0.5, delta_fun=0.5).passed
    assert rep.horizons == [16]


def test_verify_size_mismatch(k4, p3):
    with pytest.raises(StructuralError):
        verify_corp(k4, Partition.build(3, [[0]]), 2.0, 0.1)


# -- trees ---------------------------------------------------------------

def test_tree_single_vertex():
    p = tree_safe_partition(path_graph(1), 0.5)
    assert p.k == 1 and p.blocks == ((0,),)


def test_tree_path10():
    g = path_graph(10)
    p = tree_safe_partition(g, 0.5)
    m = rw_from_graph(g)
    assert p.k <= 3 * 2 ** 3
    for b in p.blocks:
        assert max_offdiag(m, b) <= 0.5 + 1e-12
    q = corp_from_tree(p, g)
    assert verify_corp(m, q, 2.0, 1 / (2 * p.k), delta_fun=0.5).passed


def test_tree_star():
    g = graph_from_nx(nx.star_graph(6))
    p = tree_safe_partition(g, 1 / 3)
    m = rw_from_graph(g)
    assert all(max_offdiag(m, b) <= 1 / 3 + 1e-12 for b in p.blocks)


def test_tree_rejects_cycle():
    g = graph_from_nx(nx.cycle_graph(5))
    with pytest.raises(NotATreeError):
        tree_safe_partition(g, 0.5)
    with pytest.raises(NotATreeError):
        far_bound(g, 0, 2)
    with pytest.raises(PreconditionError):
        tree_safe_partition(path_graph(3), 0.0)


def test_far_bound_examples():
    exact, bound, ok = far_bound(path_graph(3), 0, 2)
    assert exact == pytest.approx(0.5) and bound == 0.5 and ok
    star = graph_from_nx(nx.star_graph(4))
    # leaf to leaf: by symmetry half the excursions from the center end at w first
    exact, bound, ok = far_bound(star, 1, 2)
    assert exact == pytest.approx(0.5) and bound == 0.5 and ok
    exact, bound, ok = far_bound(star, 0, 3)
    assert exact == pytest.approx(0.25) and bound == 1.0 and ok


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 10**6))
def test_far_bound_random_trees(n, seed):
    rng = np.random.default_rng(seed)
    g = random_tree(n, rng)
    v, w = (int(x) for x in rng.choice(n, 2, replace=False))
    assert far_bound(g, v, w)[2]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 80), st.sampled_from([1.0, 0.5, 1 / 3, 0.25]), st.integers(0, 10**6))
def test_tree_classes_are_safe(n, delta, seed):
    g = random_tree(n, np.random.default_rng(seed))
    p = tree_safe_partition(g, delta)
    t = math.ceil(1 / delta - 1e-12)
    assert p.k <= (t + 1) * t ** (t + 1)
    assert sorted(v for b in p.blocks for v in b) == list(range(n))


def test_corp_u_rules():
    rng = np.random.default_rng(8)
    for _ in range(20):
        g = random_tree(int(rng.integers(5, 60)), rng)
        p = tree_safe_partition(g, 0.5)
        strict = corp_from_tree(p, g)
        loose = corp_from_tree(p, g, u_rule="all")
        assert strict.blocks == loose.blocks
        assert all(set(a) <= set(b) for a, b in zip(strict.U, loose.U))
    with pytest.raises(PreconditionError):
        corp_from_tree(p, g, u_rule="nope")


def test_tree_suite_small():
    out = tree_suite(trees=12, max_n=60, seed=1)
    assert out.passed, out.detail


# -- recurrent -----------------------------------------------------------

def test_recurrent_k2(k2):
    p = recurrent_partition(k2, 0.5, 2, 0.1)
    assert p.blocks == ((0,), (1,))
    assert p.U == p.blocks and p.V0 == ()


def test_recurrent_none():
    # one step never returns, so nothing is recurrent at R = 1
    p = recurrent_partition(rw_from_graph(path_graph(8)), 0.1, 1, 0.01)
    assert p.provenance["recurrent"] == 0 and p.k == 0


def test_greedy_coloring_proper():
    adj = {0: {1, 2}, 1: {0, 2}, 2: {0, 1}, 3: set()}
    c = greedy_coloring(adj, [0, 1, 2, 3])
    assert c == {0: 0, 1: 1, 2: 2, 3: 0}


def test_recurrent_color_bound_random():
    rng = np.random.default_rng(4)
    for _ in range(15):
        g = random_connected(int(rng.integers(4, 14)), 0.4, rng)
        m = rw_from_graph(g)
        R = int(rng.integers(2, 10))
        delta = float(rng.uniform(0.2, 0.8))
        p = recurrent_partition(m, delta, R, 0.01)
        pv = p.provenance
        if pv["recurrent"]:
            assert pv["colors"] <= pv["max_back_degree"] + 1
            assert pv["max_back_degree"] <= 2 * R / delta
        for b in p.blocks:
            assert max_offdiag(m, b) < 1.5 * delta


# -- expander ------------------------------------------------------------

def test_expander_horizon():
    T = expander_horizon(0.5, 0.3, 3, 10, 0.001)
    f = lambda T: math.sqrt(3) / 0.5 * 0.5 ** T + 0.01  # noqa: E731
    assert f(T) < 0.075 <= f(T - 1)
    with pytest.raises(PreconditionError):
        expander_horizon(0.5, 0.3, 3, 100, 0.01)


def test_random_blocks_deterministic():
    a = random_blocks(range(50), 7, 3)
    assert a == random_blocks(range(50), 7, 3)
    assert sorted(v for b in a for v in b) == list(range(50))
    assert all(b for b in a)


def test_expander_partition_regular():
    g = graph_from_nx(nx.random_regular_graph(3, 200, seed=0))
    m = rw_from_graph(g)
    p = expander_partition(m, 0.06, 0.3, seed=0)
    assert p.k > 0
    vt = p.provenance["vartheta"]
    rep = verify_corp(m, p, 2.0, vt, delta_fun=0.3)
    assert rep.induced_ok and rep.u_ok
    assert p.provenance["nice"] == p.k


def test_expander_rejects_path(p3):
    with pytest.raises(PreconditionError):
        expander_partition(p3, 0.1, 0.3)


# -- generic -------------------------------------------------------------

def test_min_n():
    assert min_N(0.5, 3) == 4
    assert (1 - 0.3) ** min_N(0.3, 2) < 0.3 ** 2


def test_schedule_ratio():
    s = schedule(2.0, 4, 0.5, 3)
    assert s[0] == 1.0 and s[1] == pytest.approx(4 * 2 * 4 * 2 ** 10)
    assert all(math.isfinite(x) for x in schedule(2.0, 4, 0.01, 100))


def test_choose_scale_identities():
    m = rw_from_graph(graph_from_nx(nx.cycle_graph(12)))
    sc = choose_scale(m, 0.4, 2)
    assert sc.N >= sc.N_min == min_N(0.4, 2)
    assert (math.floor(sc.R_prime) + 1) % 2 == 0
    assert sc.Q == pytest.approx(4 / 0.4 * sc.R_prime)
    assert sc.R == pytest.approx(sc.C * sc.Q2 / sc.theta)
    assert sc.qualifying >= 0.9 * 12
    with pytest.raises(PreconditionError):
        choose_scale(m, 1.5, 2)


def test_generic_pipeline_runs():
    g = graph_from_nx(nx.random_regular_graph(4, 300, seed=1))
    res = generic_partition(rw_from_graph(g), delta=0.4, k_exp=2, seed=0)
    d = res.to_dict()
    assert set(d) == {"partition", "scale", "diagnostics"}
    assert res.diagnostics["T"] <= 300
    assert res.partition.n == 300


def test_generic_complete_graph_has_no_transient():
    res = generic_partition(rw_from_graph(complete_graph(6)), delta=0.4, k_exp=2)
    assert res.partition.k == 0

