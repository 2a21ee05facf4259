"""Partition of the recurrent vertices by greedy coloring of a conflict graph."""
from __future__ import annotations

import math

import numpy as np

from ..chain import MarkovChain
from ..errors import InternalVerificationError, PreconditionError
from ..exact import classify_recurrent, first_visit_probabilities
from .base import Partition, max_offdiag


def conflict_graph(m: MarkovChain, S, R: int, delta: float) -> dict:
    """``v ~ w`` on S when ``w in B'_v(R)`` or ``v in B'_w(R)`` (strict ``> delta/2``)."""
    S = sorted(S)
    adj = {v: set() for v in S}
    for v in S:
        others = [w for w in S if w != v]
        if not others:
            continue
        before = first_visit_probabilities(m, v, R, kill_return=True, targets=others)
        for w in others:
            if before[w] > delta / 2:
                adj[v].add(w)
                adj[w].add(v)
    return adj


def greedy_coloring(adj: dict, order) -> dict:
    """First-fit coloring along ``order``."""
    color = {}
    for v in order:
        taken = {color[w] for w in adj[v] if w in color}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    return color


def recurrent_partition(m: MarkovChain, delta: float, R: int, vartheta: float,
                        check: bool = True) -> Partition:
    """Color the (delta, R)-recurrent set and keep the large color classes.

    Vertices are colored in order of increasing degree (ties by index).
    Classes with at most ``vartheta n`` vertices join V0; ``U_i = V_i``.
    Each kept class is checked to have induced probabilities below
    ``3 delta / 2``.
    """
    if m.graph is None:
        raise PreconditionError("recurrent partition needs a random walk on a graph")
    n = m.n
    S = sorted(classify_recurrent(m, delta, R))
    prov = {"construction": "recurrent", "delta": delta, "R": R, "vartheta": vartheta,
            "recurrent": len(S)}
    if not S:
        return Partition.build(n, [], provenance=prov | {"colors": 0})
    adj = conflict_graph(m, S, R, delta)
    deg = m.graph.degrees
    order = sorted(S, key=lambda v: (deg[v], v))
    color = greedy_coloring(adj, order)
    ncol = max(color.values()) + 1
    pos = {v: i for i, v in enumerate(order)}
    back = max((sum(pos[w] < pos[v] for w in adj[v]) for v in S), default=0)
    classes = {}
    for v, c in color.items():
        classes.setdefault(c, []).append(v)
    keep = [sorted(b) for _, b in sorted(classes.items()) if len(b) > vartheta * n]
    worst = 0.0
    if check:
        for b in keep:
            w = max_offdiag(m, b)
            worst = max(worst, w)
            if not w < 1.5 * delta:
                raise InternalVerificationError(
                    f"recurrent class has induced probability {w:.6g} >= 3*delta/2")
    prov |= {"colors": ncol, "color_bound": 2 * R / delta, "max_back_degree": back,
             "max_induced": worst}
    return Partition.build(n, keep, provenance=prov)
