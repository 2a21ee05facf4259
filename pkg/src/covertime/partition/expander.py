"""Random block partition for expanders."""
from __future__ import annotations

import math

import numpy as np

from ..chain import MarkovChain, stationary
from ..errors import PreconditionError
from ..exact import avoid_probability, is_eps_expander, spectral_gap
from .base import Partition, good_by_observation, good_vertices, u_set

MAX_T = 10 ** 6


def random_blocks(vertices, nblocks: int, seed: int) -> list:
    """Uniform assignment of ``vertices`` to ``nblocks`` labels; empty blocks dropped."""
    from ..mc import stream_uniforms
    vertices = sorted(vertices)
    u = stream_uniforms(seed, 0, len(vertices))
    lab = np.minimum((u * nblocks).astype(np.int64), nblocks - 1)
    blocks = {}
    for v, b in zip(vertices, lab):
        blocks.setdefault(int(b), []).append(v)
    return [blocks[b] for b in sorted(blocks)]


def classify_block(m: MarkovChain, W, R: int | None, delta: float) -> dict:
    """Goodness of each vertex of W: certified by observation, else exact.

    ``R=None`` skips the observation test. Returns
    ``{"good": set, "certified": set}``.
    """
    W = sorted(W)
    if len(W) == 1:
        return {"good": set(W), "certified": set(W)}
    cert = set()
    if R is not None:
        avoid = avoid_probability(m, W, R)
        cert = {v for v in W if good_by_observation(m, v, W, R, delta, avoid=avoid)}
    good = set(cert)
    if len(cert) < len(W):
        good |= set(good_vertices(m, W, delta))
    return {"good": good, "certified": cert}


def nice_blocks(m: MarkovChain, blocks, R: int, delta: float):
    """Split blocks into nice (bad fraction < delta/2) and the rest."""
    nice, rest, rows = [], [], []
    for W in blocks:
        cls = classify_block(m, W, R, delta)
        bad = len(W) - len(cls["good"])
        ok = bad < delta * len(W) / 2
        rows.append({"size": len(W), "bad": bad, "certified": len(cls["certified"]),
                     "nice": ok})
        (nice if ok else rest).append(W)
    return nice, rest, rows


def expander_horizon(eps: float, delta: float, Delta: float, R: int, pi_max: float) -> int:
    """Least T with ``sqrt(Delta)/eps (1-eps)^T + R pi_max < delta/4``."""
    if R * pi_max >= delta / 4:
        raise PreconditionError(f"R*pi_max = {R * pi_max:.4g} is not below delta/4; "
                                "no horizon works")
    T = 0
    while math.sqrt(Delta) / eps * (1 - eps) ** T + R * pi_max >= delta / 4:
        T += 1
        if T > MAX_T:
            raise PreconditionError("expander horizon search did not terminate")
    return T


def expander_partition(m: MarkovChain, eps: float, delta: float, seed: int = 0,
                       degree_cutoff: float | None = None) -> Partition:
    """Random partition of the low-degree vertices into ``ceil(Q/theta)`` blocks.

    ``T = {v : deg(v) <= cutoff}``, ``R = floor(sqrt(n))``, ``Q = 4T'/delta``
    with T' from :func:`expander_horizon`, ``theta = delta^2``. Blocks with
    too many bad vertices go to V0 and ``U_i`` keeps the vertices whose
    incoming induced probabilities are all below delta.
    """
    rep = spectral_gap(m)
    if not is_eps_expander(rep, eps):
        raise PreconditionError(f"chain is not a {eps}-expander "
                                f"(max|lambda| = {rep.gap_quantity:.6g})")
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    n = m.n
    deg = m.graph.degrees if m.graph is not None else np.diff(m.indptr)
    cutoff = float(deg.max()) if degree_cutoff is None else float(degree_cutoff)
    T = [v for v in range(n) if deg[v] <= cutoff]
    theta = delta * delta
    R = math.isqrt(n)
    prov = {"construction": "expander", "eps": eps, "delta": delta, "seed": seed,
            "degree_cutoff": cutoff, "R": R, "theta": theta, "T_size": len(T)}
    if not T:
        return Partition.build(n, [], provenance=prov)
    pi = stationary(m)
    Tp = expander_horizon(eps, delta, cutoff, R, float(pi[T].max()))
    Q = 4.0 * Tp / delta
    zeta = theta / Q
    nblocks = math.ceil(Q / theta)
    blocks = random_blocks(T, nblocks, seed)
    nice, rest, rows = nice_blocks(m, blocks, R, delta)
    U = [u_set(m, W, delta) for W in nice]
    prov |= {"horizon": Tp, "Q": Q, "zeta": zeta, "blocks": nblocks,
             "nonempty_blocks": len(blocks), "nice": len(nice), "vartheta": zeta / 2,
             "block_rows": rows}
    return Partition.build(n, nice, U, provenance=prov)
