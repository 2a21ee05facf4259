"""Scale selection and the random partition for general random walks.

At desk scale the geometric horizon schedule grows so fast that almost
every vertex is recurrent at the chosen horizon, so the construction
mostly reports diagnostics; the pipeline still runs end to end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..chain import MarkovChain
from ..errors import ScaleSelectionError, PreconditionError
from ..exact import ball_sets, return_time_cdf
from .base import Partition, u_set
from .expander import nice_blocks, random_blocks

EXACT_MAX_N = 400
MC_RETURN_REPS = 2000
MC_STEP_CAP = 20000
WALK_BUDGET = 2 * 10 ** 7       # reps * horizon for D-membership walks
BALL_BUDGET = 10 ** 5           # horizon * n for exact ball-set checks
D_REPS = 2000
PARITY_TRIES = 64


@dataclass(frozen=True)
class ScaleChoice:
    index: int
    R_prime: float          # N R_{i-1}
    Q: float                # (4/delta) R'
    R: float                # R_i
    Q1: float
    Q2: float
    N: int
    N_min: int              # before the parity adjustment
    k_exp: int
    delta: float
    C: float
    theta: float
    qualifying: int         # vertices satisfying the interval condition at `index`
    method: str
    mask: tuple = field(repr=False)   # per-vertex interval condition at `index`
    cdf_R: tuple = field(repr=False)  # Pr_v(T_v^+ <= floor(R))

    @property
    def horizon(self) -> int:
        return int(math.floor(self.R))

    def to_dict(self):
        return {"index": self.index, "R_prime": self.R_prime, "Q": self.Q, "R": self.R,
                "Q1": self.Q1, "Q2": self.Q2, "N": self.N, "N_min": self.N_min,
                "k_exp": self.k_exp, "delta": self.delta, "C": self.C, "theta": self.theta,
                "qualifying": self.qualifying, "method": self.method}


def min_N(delta: float, k_exp: int) -> int:
    """Least N with ``(1-delta)^N < delta^k`` (strict)."""
    N = 1
    while (1 - delta) ** N >= delta ** k_exp:
        N += 1
    return N


def schedule(C: float, N: int, delta: float, count: int) -> list:
    """``R_0 = 1``, ``R_i = 4 C N delta^-10 R_{i-1}``, stopping before overflow."""
    ratio = 4 * C * N * delta ** -10
    out = [1.0]
    while len(out) < count and math.isfinite(out[-1] * ratio) and out[-1] * ratio < 1e300:
        out.append(out[-1] * ratio)
    return out


def _mc_return_cdf(m: MarkovChain, hs, seed: int) -> tuple:
    """Wilson brackets ``(lo, hi)`` on ``Pr_v(T_v^+ <= h)``, shape ``(n, len(hs))``.

    Walks are cut at a step cap; past it the upper bracket is 1.
    """
    from ..mc import simulate_paths, wilson
    n = m.n
    steps = int(min(max(hs), MC_STEP_CAP))
    lo = np.zeros((n, len(hs)))
    hi = np.ones((n, len(hs)))
    for v in range(n):
        paths = simulate_paths(m, v, steps, seed=seed, reps=MC_RETURN_REPS,
                               rep0=v * MC_RETURN_REPS)
        back = paths[:, 1:] == v
        first = np.where(back.any(axis=1), back.argmax(axis=1) + 1, steps + 1)
        for j, h in enumerate(hs):
            c = int((first <= min(h, steps)).sum())
            a, b = wilson(c, MC_RETURN_REPS)
            lo[v, j] = a
            hi[v, j] = b if h <= steps else 1.0
    return lo, hi


def choose_scale(m: MarkovChain, delta: float, k_exp: int = 5, C: float = 2.0,
                 method: str = "auto", seed: int = 0) -> ScaleChoice:
    """Smallest index i with at least 0.9n vertices having
    ``Pr_v(T_v^+ in (R_{i-1}, R_i]) < delta^k``.

    N is the least integer with ``(1-delta)^N < delta^k``, bumped until
    ``floor(R') + 1`` is even. Horizons are ``floor(R_i)``.
    """
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    if k_exp < 1:
        raise PreconditionError("k_exp must be at least 1")
    if method == "auto":
        method = "exact" if m.n <= EXACT_MAX_N else "mc"
    if method not in ("exact", "mc"):
        raise PreconditionError(f"unknown method {method!r}")
    n = m.n
    theta = delta * delta
    cap = math.ceil(10 * delta ** -k_exp)
    eps = delta ** k_exp
    N0 = min_N(delta, k_exp)
    cache = {}

    def cdf(hs):
        key = tuple(hs)
        if key not in cache:
            if method == "exact":
                c = return_time_cdf(m, hs)
                cache[key] = (c, c)
            else:
                cache[key] = _mc_return_cdf(m, hs, seed)
        return cache[key]

    last = None
    for N in range(N0, N0 + PARITY_TRIES):
        Rs = schedule(C, N, delta, cap)
        hs = [int(math.floor(r)) for r in Rs]
        lo, hi = cdf(hs)
        for i in range(1, len(Rs)):
            # interval mass: upper bound hi(b) - lo(a), exact when lo == hi
            mass = hi[:, i] - lo[:, i - 1]
            mask = mass < eps
            if mask.sum() < 0.9 * n:
                continue
            Rp = N * Rs[i - 1]
            if (int(math.floor(Rp)) + 1) % 2:
                last = (N, i)
                break
            Q = 4.0 / delta * Rp
            Q1 = Q * delta ** -3
            Q2 = Q1 * delta ** -4
            R = Rs[i]
            if not math.isclose(R, C * Q2 / theta, rel_tol=1e-9):
                raise ScaleSelectionError(f"R = {R} differs from C*Q2/theta = {C * Q2 / theta}")
            return ScaleChoice(i, Rp, Q, R, Q1, Q2, N, N0, k_exp, delta, C, theta,
                               int(mask.sum()), method, tuple(bool(x) for x in mask),
                               tuple(float(x) for x in hi[:, i]))
        else:
            raise ScaleSelectionError(
                f"no index below {cap} has 0.9n vertices with interval mass < {eps:.3g}")
    raise ScaleSelectionError(f"parity of R'+1 not reached within {PARITY_TRIES} values of N "
                              f"(last attempt N={last[0]}, i={last[1]})")


@dataclass
class GenericResult:
    partition: Partition
    scale: ScaleChoice
    diagnostics: dict

    def to_dict(self):
        return {"partition": self.partition.to_dict(), "scale": self.scale.to_dict(),
                "diagnostics": self.diagnostics}


def _d_set(m, T, R, Q1, theta, delta, seed, reps):
    """Vertices of T whose visit count into T falls below Q1 too often."""
    from ..mc import estimate_visit_stats
    if not T:
        return [], {"mode": "empty"}
    if Q1 > len(T):
        # |X_[R] ∩ T| <= |T| < Q1 always
        return list(T), {"mode": "exact", "reason": "Q1 exceeds |T|"}
    if R * reps > WALK_BUDGET:
        return list(T), {"mode": "budget", "reason": "horizon beyond walk budget"}
    D, straddle = [], 0
    for v in T:
        st = estimate_visit_stats(m, v, R, T, reps, seed=seed + v, thresholds=(Q1,))
        e = st.below[Q1]
        if e.hi <= theta * delta:
            continue
        if e.lo <= theta * delta:
            straddle += 1
        D.append(v)
    return D, {"mode": "mc", "reps": reps, "straddling": straddle}


def generic_partition(m: MarkovChain, C: float = 2.0, delta: float = 0.4, k_exp: int = 5,
                      degree_cutoff: float | None = None, seed: int = 0,
                      scale: ScaleChoice | None = None, d_reps: int = D_REPS) -> GenericResult:
    """Random partition of the transient low-degree vertices.

    T collects vertices that are (delta, R)-transient, have degree below the
    cutoff and satisfy the interval condition of the chosen scale. D (vertices
    of T that see fewer than Q1 vertices of T too often) joins V0 with
    everything outside T. The rest of T is split uniformly into
    ``ceil(Q/theta)`` blocks, non-nice blocks go to V0, and U_i keeps the
    vertices whose incoming induced probabilities are below delta.
    No shortfall is fatal; all are reported in the diagnostics.
    """
    sc = choose_scale(m, delta, k_exp, C, seed=seed) if scale is None else scale
    n = m.n
    deg = m.graph.degrees if m.graph is not None else np.diff(m.indptr)
    cutoff = float(deg.max()) + 1 if degree_cutoff is None else float(degree_cutoff)
    R = sc.horizon
    transient = np.asarray(sc.cdf_R) <= 1 - delta
    T = [v for v in range(n) if transient[v] and deg[v] < cutoff and sc.mask[v]]
    theta = sc.theta
    D, dinfo = _d_set(m, T, R, sc.Q1, theta, delta, seed, d_reps)
    Dset = set(D)
    rest = [v for v in T if v not in Dset]
    zeta = theta / sc.Q
    nblocks = math.ceil(sc.Q / theta)
    diag = {"T": len(T), "T_target": 0.6 * n, "T_ok": len(T) >= 0.6 * n,
            "D": len(D), "D_threshold": 2 * theta * n, "D_ok": len(D) < 2 * theta * n,
            "D_info": dinfo, "zeta": zeta, "blocks": nblocks, "block_min": zeta * n / 2,
            "transient": int(transient.sum()), "degree_cutoff": cutoff}
    prov = {"construction": "generic", "C": C, "delta": delta, "k_exp": k_exp, "seed": seed,
            "degree_cutoff": cutoff, "scale_index": sc.index, "R": sc.R}
    if not rest:
        diag |= {"nice": 0, "block_rows": [], "ball_check": "skipped (empty)"}
        return GenericResult(Partition.build(n, [], provenance=prov), sc, diag)
    blocks = random_blocks(rest, nblocks, seed)
    obs_R = R if R * n <= BALL_BUDGET else None
    nice, _, rows = nice_blocks(m, blocks, obs_R, delta)
    bad = sum(r["bad"] for r in rows)
    diag |= {"nonempty_blocks": len(blocks), "nice": len(nice), "block_rows": rows,
             "bad_fraction": bad / len(rest), "bad_target": 4 * theta,
             "blocks_small": sum(r["size"] < zeta * n / 2 for r in rows)}
    if obs_R is not None:
        Tset = set(T)
        worst_B, worst_Pw = 0, 0.0
        for v in T:
            bs = ball_sets(m, v, R, delta)
            worst_B = max(worst_B, len(bs.B & Tset))
            worst_Pw = max(worst_Pw, zeta * len(bs.Bprime & Tset))
        diag |= {"ball_check": {"max_B_cap_T": worst_B, "Q": sc.Q, "ok": worst_B <= sc.Q,
                                "max_union_bound": worst_Pw, "theta": theta,
                                "union_ok": worst_Pw < theta}}
    else:
        diag["ball_check"] = "skipped (horizon beyond budget)"
    U = [u_set(m, W, delta) for W in nice]
    return GenericResult(Partition.build(n, nice, U, provenance=prov), sc, diag)
