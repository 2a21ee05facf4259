"""Graphs, Markov chains, start rules and walk traces.

States are dense integers ``0..n-1``. Transition probabilities are held as
64-bit floats in CSR form; chains built from graphs with at most
``EXACT_MAX_STATES`` vertices also carry the same rows as ``Fraction`` so the
exact oracles can run bit-exact.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (ChainValidationError, DegenerateVertexError,
                     NotIrreducibleError, PreconditionError)

ROW_SUM_TOL = 1e-9
STATIONARY_SUM_TOL = 1e-12
EXACT_MAX_STATES = 12
DIRECT_SOLVE_MAX = 2000


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``0..n-1``."""

    n: int
    edges: frozenset
    adjacency: tuple = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        if n < 0:
            raise ChainValidationError("vertex count must be nonnegative")
        seen = set()
        adj = [[] for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise ChainValidationError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ChainValidationError(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ChainValidationError(f"parallel edge {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        return cls(n, frozenset(seen), tuple(tuple(sorted(a)) for a in adj))

    @property
    def degrees(self) -> np.ndarray:
        return _frozen([len(a) for a in self.adjacency], np.int64)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def m(self) -> int:
        return len(self.edges)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def is_tree(self) -> bool:
        return self.n >= 1 and self.m == self.n - 1 and self.is_connected()

    def distances_from(self, source: int) -> np.ndarray:
        """BFS distances; unreachable vertices get -1."""
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        frontier = [source]
        while frontier:
            nxt = []
            for u in frontier:
                for w in self.adjacency[u]:
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        return dist


class MarkovChain:
    """Row-stochastic transition structure over ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of states.
    rows : sequence of sequences of (target, probability)
        Sparse rows. Duplicate targets are summed, zeros dropped.
    stationary : array_like, optional
        Known stationary distribution; validated against the rows.
    reversible : bool, optional
        Reversibility certificate (trusted only together with ``stationary``).
    exact_rows : sequence of dict, optional
        The same rows as ``Fraction`` values, for rational-mode oracles.
    graph : Graph, optional
        Underlying graph when the chain is a simple random walk.
    """

    def __init__(self, n, rows, stationary=None, reversible=None,
                 exact_rows=None, name=None, graph=None):
        if len(rows) != n:
            raise ChainValidationError(f"expected {n} rows, got {len(rows)}")
        indptr = [0]
        indices = []
        probs = []
        for u, row in enumerate(rows):
            merged = {}
            for v, p in row:
                v = int(v)
                p = float(p)
                if not 0 <= v < n:
                    raise ChainValidationError(f"row {u}: target {v} out of range")
                if not (0.0 <= p <= 1.0) or p != p:
                    raise ChainValidationError(f"row {u}: probability {p} outside [0, 1]")
                merged[v] = merged.get(v, 0.0) + p
            total = 0.0
            for v in sorted(merged):
                if merged[v] > 0.0:
                    indices.append(v)
                    probs.append(merged[v])
                    total += merged[v]
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise ChainValidationError(f"row {u} sums to {total!r}")
            indptr.append(len(indices))
        self.n = int(n)
        self.indptr = _frozen(indptr, np.int64)
        self.indices = _frozen(indices, np.int64)
        self.probs = _frozen(probs, np.float64)
        cum = np.empty(len(probs))
        for u in range(n):
            a, b = indptr[u], indptr[u + 1]
            cum[a:b] = np.minimum(np.cumsum(self.probs[a:b]), 1.0)
            if b > a:
                cum[b - 1] = 1.0
        cum.setflags(write=False)
        self.cum = cum
        self.name = name
        self.graph = graph
        self._matrix = None
        self._dense = None
        self._exact = None
        if exact_rows is not None:
            ex = []
            for u, row in enumerate(exact_rows):
                row = {int(v): Fraction(p) for v, p in dict(row).items() if p != 0}
                if sum(row.values()) != 1:
                    raise ChainValidationError(f"exact row {u} does not sum to 1")
                ex.append(row)
            self._exact = tuple(ex)
        self.stationary = None
        self.reversible = None
        if stationary is not None:
            pi = np.asarray(stationary, dtype=np.float64)
            if pi.shape != (n,) or np.any(pi < 0):
                raise ChainValidationError("stationary vector has wrong shape or sign")
            if abs(pi.sum() - 1.0) > STATIONARY_SUM_TOL:
                raise ChainValidationError("stationary vector does not sum to 1")
            if np.max(np.abs(pi @ self.matrix - pi), initial=0.0) > ROW_SUM_TOL:
                raise ChainValidationError("stationary vector is not invariant")
            self.stationary = _frozen(pi, np.float64)
            self.reversible = reversible
        self._id = None

    # -- views ---------------------------------------------------------
    @property
    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            mat = sp.csr_matrix((self.probs, self.indices, self.indptr),
                                shape=(self.n, self.n))
            self._matrix = mat
        return self._matrix

    def dense(self) -> np.ndarray:
        """Dense transition matrix (cached, read-only)."""
        if self._dense is None:
            d = self.matrix.toarray()
            d.setflags(write=False)
            self._dense = d
        return self._dense

    @property
    def exact(self):
        """Rational rows (tuple of dicts) or None."""
        return self._exact

    def row(self, u: int):
        a, b = self.indptr[u], self.indptr[u + 1]
        return self.indices[a:b], self.probs[a:b]

    def prob(self, u: int, v: int) -> float:
        idx, pr = self.row(u)
        k = np.searchsorted(idx, v)
        if k < len(idx) and idx[k] == v:
            return float(pr[k])
        return 0.0

    @property
    def chain_id(self) -> str:
        """Content digest, used as walk-trace provenance."""
        if self._id is None:
            h = hashlib.sha256()
            h.update(np.int64(self.n).tobytes())
            for arr in (self.indptr, self.indices, self.probs):
                h.update(np.ascontiguousarray(arr).tobytes())
            self._id = h.hexdigest()[:16]
        return self._id

    def support_graph(self) -> sp.csr_matrix:
        return sp.csr_matrix((np.ones_like(self.probs), self.indices, self.indptr),
                             shape=(self.n, self.n))

    def __repr__(self):
        return f"MarkovChain(n={self.n}, nnz={len(self.probs)}, id={self.chain_id})"

    @classmethod
    def from_dense(cls, P, **kw) -> "MarkovChain":
        P = np.asarray(P, dtype=np.float64)
        rows = [[(j, P[i, j]) for j in np.flatnonzero(P[i])] for i in range(P.shape[0])]
        return cls(P.shape[0], rows, **kw)

    @classmethod
    def from_fractions(cls, exact_rows, **kw) -> "MarkovChain":
        rows = [[(v, float(p)) for v, p in dict(r).items()] for r in exact_rows]
        return cls(len(rows), rows, exact_rows=exact_rows, **kw)


@dataclass(frozen=True)
class StartRule:
    """How ``X_0`` is chosen: a fixed vertex or a fixed distribution."""

    kind: str
    payload: object

    @classmethod
    def fixed(cls, v: int) -> "StartRule":
        return cls("fixed-vertex", int(v))

    @classmethod
    def distribution(cls, p) -> "StartRule":
        p = np.asarray(p, dtype=np.float64)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ChainValidationError("start distribution must be a probability vector")
        return cls("distribution", _frozen(p, np.float64))

    @classmethod
    def coerce(cls, start) -> "StartRule":
        if isinstance(start, StartRule):
            return start
        if isinstance(start, (int, np.integer)):
            return cls.fixed(int(start))
        return cls.distribution(start)

    def vector(self, n: int) -> np.ndarray:
        if self.kind == "fixed-vertex":
            if not 0 <= self.payload < n:
                raise ChainValidationError(f"start vertex {self.payload} out of range")
            e = np.zeros(n)
            e[self.payload] = 1.0
            return e
        if len(self.payload) != n:
            raise ChainValidationError("start distribution has wrong length")
        return np.asarray(self.payload, dtype=np.float64)

    def exact_vector(self, n: int):
        if self.kind == "fixed-vertex":
            return {self.payload: Fraction(1)}
        return {i: Fraction(float(p)) for i, p in enumerate(self.payload) if p > 0}

    def support(self, n: int):
        return [int(i) for i in np.flatnonzero(self.vector(n))]


@dataclass(frozen=True)
class WalkTrace:
    """Realized trajectory ``X_0..X_s`` with seed provenance."""

    states: tuple
    seed: int
    chain_id: str
    replication: int = 0

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    def validate(self, m: MarkovChain) -> None:
        for a, b in zip(self.states, self.states[1:]):
            if m.prob(a, b) <= 0.0:
                raise ChainValidationError(f"transition {a}->{b} has zero probability")


# -- constructors and basic analysis -----------------------------------

def rw_from_graph(g: Graph, name=None) -> MarkovChain:
    """Simple random walk on ``g``; stationary law ``d_v / 2|E|``."""
    deg = [len(a) for a in g.adjacency]
    for v, d in enumerate(deg):
        if d == 0:
            raise DegenerateVertexError(f"vertex {v} is isolated")
    rows = [[(w, 1.0 / deg[v]) for w in g.adjacency[v]] for v in range(g.n)]
    exact_rows = None
    if g.n <= EXACT_MAX_STATES:
        exact_rows = [{w: Fraction(1, deg[v]) for w in g.adjacency[v]} for v in range(g.n)]
    pi = np.array(deg, dtype=np.float64) / (2.0 * g.m)
    return MarkovChain(g.n, rows, stationary=pi, reversible=True,
                       exact_rows=exact_rows, name=name, graph=g)


def stationary_exact_rw(g: Graph):
    """Closed-form stationary law of RW on ``g`` as Fractions."""
    return [Fraction(len(a), 2 * g.m) for a in g.adjacency]


def is_irreducible(m: MarkovChain) -> bool:
    ncomp, _ = connected_components(m.support_graph(), directed=True,
                                    connection="strong")
    return ncomp == 1


def stationary(m: MarkovChain, tol: float = 1e-9) -> np.ndarray:
    """Stationary distribution of an irreducible chain.

    Direct linear solve up to ``DIRECT_SOLVE_MAX`` states, power iteration on
    the lazy chain above that.
    """
    if m.stationary is not None:
        return m.stationary
    if not is_irreducible(m):
        raise NotIrreducibleError("chain is not irreducible")
    n = m.n
    if n <= DIRECT_SOLVE_MAX:
        A = m.dense().T.copy() - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    else:
        P = m.matrix
        pi = np.full(n, 1.0 / n)
        for _ in range(1_000_000):
            nxt = 0.5 * (pi + P.T @ pi)
            if np.abs(nxt - pi).sum() < 1e-12:
                pi = nxt
                break
            pi = nxt
        pi /= pi.sum()
    resid = np.max(np.abs(pi @ m.matrix - pi))
    if resid > max(tol, 1e-12):
        raise ChainValidationError(f"stationary residual {resid:.3e} exceeds {tol:.1e}")
    return pi


def is_reversible(m: MarkovChain, tol: float = 1e-9) -> bool:
    """Detailed balance ``pi_u P(u,v) = pi_v P(v,u)`` for every pair."""
    pi = stationary(m)
    F = sp.diags(pi) @ m.matrix
    diff = (F - F.T).tocoo()
    return bool(np.max(np.abs(diff.data), initial=0.0) <= tol)


def require_reversible(m: MarkovChain, tol: float = 1e-9) -> np.ndarray:
    if m.reversible and m.stationary is not None:
        return m.stationary
    if not is_reversible(m, tol):
        raise PreconditionError("chain is not reversible")
    return stationary(m)


@dataclass(frozen=True)
class PathReversibility:
    lhs: float
    rhs: float
    passed: bool


def check_path_reversibility(m: MarkovChain, path: Sequence[int],
                             tol: float = 1e-9) -> PathReversibility:
    """Compare the forward and reversed weights of a state path."""
    pi = stationary(m)
    path = [int(v) for v in path]
    lhs = float(pi[path[0]])
    rhs = float(pi[path[-1]])
    for a, b in zip(path, path[1:]):
        lhs *= m.prob(a, b)
    for a, b in zip(path[::-1], path[::-1][1:]):
        rhs *= m.prob(a, b)
    scale = max(lhs, rhs, 1e-300)
    return PathReversibility(lhs, rhs, abs(lhs - rhs) <= tol * scale)
