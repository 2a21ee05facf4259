"""Constructive safe coloring of trees.

Levels are colored independently: level i uses palette ``i mod t`` with
``t = ceil(1/delta)``. Level ``i >= t`` is split by the ancestors at level
``i - t``; each piece ``D_a ∩ L_i`` is colored by the staged procedure below
with its anchor ``a`` as root and target depth t. For ``i < t`` the anchor is
a virtual root t - i steps above the real root.

Staged procedure (U = uncolored targets, U_v = U ∩ D_v, j = depth below the
anchor): while ``|U| > t^t``, take the deepest v with ``|U_v| > t^{t-j}``
(lowest index on ties) and repeatedly color one lowest-index uncolored
target below each child of v that still has some, as long as at least t
children qualify. Each such set gets its own color ``(q, "C", j, idx)``.
Leftovers get distinct colors ``(q, "B", idx)``.
"""
from __future__ import annotations

import math
from collections import defaultdict

from ..chain import Graph, rw_from_graph
from ..errors import InternalVerificationError, NotATreeError, PreconditionError
from ..exact import hit_before_return
from .base import Partition, max_offdiag, u_set

SAFETY_SLACK = 1e-9


def _rooted(g: Graph, root: int):
    parent = [-1] * g.n
    depth = [0] * g.n
    order = [root]
    seen = [False] * g.n
    seen[root] = True
    for v in order:
        for w in g.adjacency[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                depth[w] = depth[v] + 1
                order.append(w)
    children = [[] for _ in range(g.n)]
    for v in order[1:]:
        children[parent[v]].append(v)
    for c in children:
        c.sort()
    return parent, depth, children


def _color_piece(targets, anchor_chain, t, q, colors):
    """Color one piece (targets at depth t below its anchor).

    ``anchor_chain(v)`` gives the ancestor of target v at each relative
    depth 1..t-1 (``None`` for virtual ones, which never qualify).
    """
    U = set(targets)
    # relative-depth tree restricted to ancestors of the targets
    below = defaultdict(set)       # v -> uncolored targets below v
    child_of = {}                  # (v, target) -> child of v on the path
    level = {}
    for x in targets:
        chain = anchor_chain(x)    # list of (relative depth j, vertex), j = 0..t
        for (j, v), (_, c) in zip(chain, chain[1:]):
            if v is None:
                continue
            below[v].add(x)
            child_of[(v, x)] = c
            level[v] = j
    used_idx = defaultdict(int)    # (q, j) -> next color index
    while len(U) > t ** t:
        cands = [v for v in below if len(below[v] & U) > t ** (t - level[v])]
        if not cands:
            raise InternalVerificationError("no vertex qualifies while |U| > t^t")
        v = min(cands, key=lambda u: (-level[u], u))
        j = level[v]
        while True:
            groups = defaultdict(list)
            for x in below[v] & U:
                groups[child_of[(v, x)]].append(x)
            if len(groups) < t:
                break
            S = [min(xs) for _, xs in sorted(groups.items())]
            idx = used_idx[(q, j)]
            used_idx[(q, j)] += 1
            for x in S:
                colors[x] = (q, "C", j, idx)
            U.difference_update(S)
    for idx, x in enumerate(sorted(U)):
        colors[x] = (q, "B", idx)


def tree_safe_partition(g: Graph, delta: float, root: int = 0,
                        verify: bool = True) -> Partition:
    """Partition V into classes with every induced transition ``<= delta``.

    At most ``(t+1) t^(t+1)`` classes, ``t = ceil(1/delta)``. Each class is
    checked with the induced chain before returning.
    """
    if not g.is_tree():
        raise NotATreeError("input graph is not a tree")
    if not 0 < delta <= 1:
        raise PreconditionError("delta must lie in (0, 1]")
    t = math.ceil(1.0 / delta - 1e-12)
    n = g.n
    prov = {"construction": "tree", "delta": delta, "root": root, "t": t}
    if n == 1:
        return Partition.build(1, [[0]], provenance=prov | {"k_bound": (t + 1) * t ** (t + 1)})
    parent, depth, _ = _rooted(g, root)
    by_level = defaultdict(list)
    for v in range(n):
        by_level[depth[v]].append(v)

    def ancestor(v, up):
        for _ in range(up):
            v = parent[v]
        return v

    colors = {}
    for i in sorted(by_level):
        q = i % t
        if i >= t:
            pieces = defaultdict(list)
            for v in by_level[i]:
                pieces[ancestor(v, t)].append(v)

            def chain(x, i=i):
                return [(j, ancestor(x, t - j)) for j in range(t + 1)]
        else:
            pieces = {None: list(by_level[i])}
            off = t - i          # virtual levels above the real root

            def chain(x, i=i, off=off):
                out = [(j, None) for j in range(off)]
                return out + [(off + j, ancestor(x, i - j)) for j in range(i + 1)]
        for a in sorted(pieces, key=lambda a: -1 if a is None else a):
            _color_piece(sorted(pieces[a]), chain, t, q, colors)
    classes = defaultdict(list)
    for v, c in colors.items():
        classes[c].append(v)
    blocks = sorted((sorted(vs) for vs in classes.values()), key=lambda b: b[0])
    k_bound = (t + 1) * t ** (t + 1)
    if len(blocks) > k_bound:
        raise InternalVerificationError(f"{len(blocks)} classes exceed the bound {k_bound}")
    worst = 0.0
    if verify:
        m = rw_from_graph(g)
        for b in blocks:
            w = max_offdiag(m, b)
            worst = max(worst, w)
            if w > delta + SAFETY_SLACK:
                raise InternalVerificationError(
                    f"class {b[:6]}... has induced probability {w:.6g} > {delta}")
    prov |= {"k": len(blocks), "k_bound": k_bound, "max_induced": worst}
    return Partition.build(n, blocks, provenance=prov)


def corp_from_tree(p: Partition, g: Graph, vartheta: float | None = None,
                   u_rule: str = "strict") -> Partition:
    """Turn a safe coloring into a partition for the verifier.

    Classes with more than ``vartheta n`` vertices are kept (default
    ``vartheta = 1/(2k)``), the rest form V0. With ``u_rule="strict"``
    ``U_i = {w : max_{v != w} phi_i(v, w) < delta}``; with ``u_rule="all"``
    ``U_i = V_i``. Safe classes can attain ``phi_i = delta`` exactly (a leaf
    two steps from a same-class vertex when t = 2), which the strict
    verifier rejects, hence the default.
    """
    k = max(p.k, 1)
    vt = 1.0 / (2 * k) if vartheta is None else vartheta
    keep = [b for b in p.blocks if len(b) > vt * p.n]
    if u_rule == "all":
        U = keep
    elif u_rule == "strict":
        m = rw_from_graph(g) if g.n > 1 else None
        U = [u_set(m, b, p.provenance["delta"]) if len(b) > 1 else b for b in keep]
    else:
        raise PreconditionError(f"unknown u_rule {u_rule!r}")
    return Partition.build(p.n, keep, U, provenance=p.provenance | {
        "vartheta": vt, "selected": len(keep), "u_rule": u_rule})


def far_bound(g: Graph, v: int, w: int) -> tuple:
    """``(Pr_v(T_w < T_v^+), 1/d(v, w), pass)`` on a tree."""
    if not g.is_tree():
        raise NotATreeError("input graph is not a tree")
    if v == w:
        raise PreconditionError("v and w must differ")
    d = int(g.distances_from(v)[w])
    exact = hit_before_return(rw_from_graph(g), v, w)
    return exact, 1.0 / d, exact <= 1.0 / d + 1e-12
