"""Partitions, goodness tests and the verifier for partition conditions.

A partition of ``V`` is ``V0 ∪ V_1 ∪ ... ∪ V_k`` with a designated
``U_i ⊆ V_i`` per block. For a block W the induced (watched) chain is
``phi_W``; a vertex v of W is *good* when ``max_{w != v} phi_W(v, w) < delta``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from ..chain import MarkovChain
from ..errors import ParseError, StructuralError
from ..exact import GAMMA, avoid_probability, first_visit_probabilities, induced_matrix


@dataclass(frozen=True)
class Partition:
    """Blocks ``V_1..V_k`` (sorted tuples), ``U_i ⊆ V_i`` and the rest ``V0``."""

    n: int
    V0: tuple
    blocks: tuple
    U: tuple
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        seen = np.zeros(self.n, dtype=np.int64)
        for part in (self.V0, *self.blocks):
            for v in part:
                if not 0 <= v < self.n:
                    raise StructuralError(f"vertex {v} out of range")
                seen[v] += 1
        if np.any(seen != 1):
            bad = np.flatnonzero(seen != 1)[:5].tolist()
            raise StructuralError(f"blocks do not partition V (first offenders {bad})")
        if len(self.U) != len(self.blocks):
            raise StructuralError("need exactly one U_i per block")
        for i, (B, U) in enumerate(zip(self.blocks, self.U)):
            if not B:
                raise StructuralError(f"block {i} is empty")
            if not set(U) <= set(B):
                raise StructuralError(f"U_{i} is not contained in V_{i}")

    @classmethod
    def build(cls, n: int, blocks: Iterable[Iterable[int]], U=None, V0=None,
              provenance=None) -> "Partition":
        blocks = tuple(tuple(sorted(int(v) for v in b)) for b in blocks)
        U = blocks if U is None else tuple(tuple(sorted(int(v) for v in u)) for u in U)
        if V0 is None:
            used = {v for b in blocks for v in b}
            V0 = tuple(v for v in range(n) if v not in used)
        return cls(int(n), tuple(sorted(int(v) for v in V0)), blocks, U, dict(provenance or {}))

    @property
    def k(self) -> int:
        return len(self.blocks)

    def to_dict(self):
        return {"n": self.n, "V0": list(self.V0), "blocks": [list(b) for b in self.blocks],
                "U": [list(u) for u in self.U], "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d) -> "Partition":
        try:
            return cls.build(d["n"], d["blocks"], d.get("U"), d.get("V0"), d.get("provenance"))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed partition: {exc}") from None

    def dumps(self) -> str:
        from ..io import dumps
        return dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "Partition":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None


# -- goodness ----------------------------------------------------------

def induced_offdiag(m: MarkovChain, W: Iterable[int]) -> tuple:
    """``(states, Phi)`` for the induced chain with the diagonal zeroed."""
    states, Phi = induced_matrix(m, W)
    Phi = Phi.copy()
    np.fill_diagonal(Phi, 0.0)
    return states, Phi


def max_offdiag(m: MarkovChain, W: Iterable[int]) -> float:
    W = sorted(set(int(w) for w in W))
    if len(W) < 2:
        return 0.0
    _, Phi = induced_offdiag(m, W)
    return float(Phi.max())


def is_good(m: MarkovChain, v: int, W: Iterable[int], delta: float) -> bool:
    """``max_{w != v in W} phi_W(v, w) < delta`` (strict)."""
    W = sorted(set(int(w) for w in W))
    if v not in W:
        raise StructuralError(f"{v} is not in W")
    if len(W) == 1:
        return True
    states, Phi = induced_offdiag(m, W)
    return bool(Phi[states.index(v)].max() < delta)


def good_vertices(m: MarkovChain, W: Iterable[int], delta: float) -> frozenset:
    """All good vertices of W from one induced-chain solve."""
    W = sorted(set(int(w) for w in W))
    if len(W) == 1:
        return frozenset(W)
    states, Phi = induced_offdiag(m, W)
    return frozenset(s for s, row in zip(states, Phi) if row.max() < delta)


def good_by_observation(m: MarkovChain, v: int, W: Iterable[int], R: int, delta: float,
                        avoid=None) -> bool:
    """Sufficient test for goodness: True means certified good, False means
    inconclusive (never a verdict of bad).

    Certified iff ``W ∩ B'_v(R) = ∅`` and ``Pr_v(X_[R] ∩ W = ∅) < delta/2``.
    ``avoid`` may carry precomputed ``avoid_probability(m, W, R)``.
    """
    W = sorted(set(int(w) for w in W))
    if v not in W:
        raise StructuralError(f"{v} is not in W")
    others = [w for w in W if w != v]
    if others:
        before = first_visit_probabilities(m, v, R, kill_return=True, targets=others)
        if np.any(before[others] > delta / 2):
            return False
    if avoid is None:
        avoid = avoid_probability(m, W, R)
    return bool(avoid[v] < delta / 2)


def u_set(m: MarkovChain, W: Iterable[int], delta: float) -> tuple:
    """``{w in W : max_{v != w} phi_W(v, w) < delta}`` (column condition)."""
    W = sorted(set(int(w) for w in W))
    if len(W) == 1:
        return tuple(W)
    states, Phi = induced_offdiag(m, W)
    return tuple(s for s, col in zip(states, Phi.T) if col.max() < delta)


# -- verifier ----------------------------------------------------------

@dataclass
class CorPReport:
    sizes_ok: bool           # |V_i| > vartheta n for all i
    v0_ok: bool              # |V0| < (1 - gamma) n
    u_ok: bool               # |U_i| > gamma |V_i|
    induced_ok: bool         # max phi_i(v, w) over w in U_i below the threshold
    threshold: float
    n: int
    vartheta: float
    gamma: float
    C: float
    per_block: list
    horizons: list           # (C/gamma)|V_i| induced-chain steps per block

    @property
    def passed(self) -> bool:
        return self.sizes_ok and self.v0_ok and self.u_ok and self.induced_ok

    def to_dict(self):
        return {"pass": self.passed, "sizes_ok": self.sizes_ok, "v0_ok": self.v0_ok,
                "u_ok": self.u_ok, "induced_ok": self.induced_ok,
                "threshold": self.threshold, "n": self.n, "vartheta": self.vartheta,
                "gamma": self.gamma, "C": self.C, "per_block": self.per_block,
                "horizons": self.horizons}


def _threshold(delta_fun, C, gamma) -> float:
    if callable(delta_fun):
        return float(delta_fun(C / gamma ** 2, gamma))
    return float(delta_fun)


def verify_corp(m: MarkovChain, partition: Partition, C: float, vartheta: float,
                gamma: float = GAMMA, delta_fun: float | Callable = 0.5) -> CorPReport:
    """Check the four partition conditions.

    ``delta_fun`` is either a constant or a callable ``(C/gamma^2, gamma) -> delta``
    giving the threshold for the induced-chain condition.
    """
    if partition.n != m.n:
        raise StructuralError(f"partition has n={partition.n}, chain has n={m.n}")
    n = m.n
    thr = _threshold(delta_fun, C, gamma)
    rows = []
    sizes_ok = u_ok = ind_ok = True
    for B, U in zip(partition.blocks, partition.U):
        size_ok = len(B) > vartheta * n
        uu = len(U) > gamma * len(B)
        worst = 0.0
        if len(B) > 1 and U:
            states, Phi = induced_offdiag(m, B)
            cols = [states.index(u) for u in U]
            worst = float(Phi[:, cols].max())
        iok = worst < thr
        rows.append({"size": len(B), "U": len(U), "size_ok": size_ok, "u_ok": uu,
                     "max_induced": worst, "induced_ok": iok})
        sizes_ok &= size_ok
        u_ok &= uu
        ind_ok &= iok
    return CorPReport(bool(sizes_ok), len(partition.V0) < (1 - gamma) * n, bool(u_ok),
                      bool(ind_ok), thr, n, float(vartheta), float(gamma), float(C), rows,
                      [math.ceil(C / gamma * len(B)) for B in partition.blocks])
