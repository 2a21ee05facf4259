"""Exact computation: transition powers, induced chains, cover probabilities,
hitting statistics, ball sets, recurrence, spectra and inequality evaluators.

``X_[R]`` always means ``{X_1, ..., X_R}``; ``X_0`` only counts toward cover
when ``include_start`` is set. Membership thresholds are compared exactly as
printed (strict ``>``/``<``); slack is reserved for linear-algebra residuals.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .chain import (DIRECT_SOLVE_MAX, EXACT_MAX_STATES, Graph, MarkovChain,
                    StartRule, require_reversible, stationary)
from .errors import (BudgetError, DegenerateHorizonError, EscapingMassError,
                     PreconditionError)

GAMMA = 0.1
COVER_MAX_TARGETS = 24
COVER_MAX_STATES = 1 << 25
DENSE_MAX = 512
# state-steps allowed for forward DPs before switching to spectral methods
DP_STEP_BUDGET = 2 * 10 ** 9


def _op(m: MarkovChain):
    return m.dense() if m.n <= DENSE_MAX else m.matrix


def _as_set(states: Iterable[int], n: int) -> list:
    out = sorted({int(s) for s in states})
    for s in out:
        if not 0 <= s < n:
            raise PreconditionError(f"state {s} out of range")
    return out


# -- transition powers --------------------------------------------------

def transition_power(m: MarkovChain, v: int, t: int, exact: bool = False):
    """Row ``p^t(v, .)``; as a dict of Fractions when ``exact``."""
    if t < 0:
        raise PreconditionError("t must be nonnegative")
    if exact:
        rows = _exact_rows(m)
        cur = {v: Fraction(1)}
        for _ in range(t):
            nxt = {}
            for x, px in cur.items():
                for y, p in rows[x].items():
                    nxt[y] = nxt.get(y, 0) + px * p
            cur = nxt
        return cur
    P = m.matrix
    x = np.zeros(m.n)
    x[v] = 1.0
    for _ in range(t):
        x = P.T @ x
    return x


def _exact_rows(m: MarkovChain):
    if m.exact is None:
        raise PreconditionError("chain has no rational rows (exact mode needs them)")
    return m.exact


# -- induced chain ------------------------------------------------------

def _reaches(m: MarkovChain, targets) -> np.ndarray:
    """Boolean mask of states from which ``targets`` is reachable."""
    rev = m.support_graph().T.tocsr()
    ok = np.zeros(m.n, dtype=bool)
    stack = list(targets)
    ok[stack] = True
    while stack:
        y = stack.pop()
        for x in rev.indices[rev.indptr[y]:rev.indptr[y + 1]]:
            if not ok[x]:
                ok[x] = True
                stack.append(x)
    return ok


def _solve(A, B):
    if A.shape[0] == 0:
        return np.zeros((0, B.shape[1]))
    if A.shape[0] <= DIRECT_SOLVE_MAX:
        return np.linalg.solve(A.toarray() if sp.issparse(A) else A,
                               B.toarray() if sp.issparse(B) else B)
    lu = spla.splu(sp.csc_matrix(A))
    return lu.solve(B.toarray() if sp.issparse(B) else np.asarray(B))


def induced_matrix(m: MarkovChain, W: Iterable[int]) -> tuple:
    """Dense transition matrix of the chain watched on ``W``.

    Returns ``(states, Phi)`` where ``states`` is ``sorted(W)`` and
    ``Phi[i, j] = Pr_{states[i]}(X_{T_W^+} = states[j])``.
    """
    states = _as_set(W, m.n)
    if not states:
        raise PreconditionError("W must be nonempty")
    if not _reaches(m, states).all():
        raise EscapingMassError("W is not reached with probability 1 from every state")
    inW = np.zeros(m.n, dtype=bool)
    inW[states] = True
    out = np.flatnonzero(~inW)
    P = m.matrix
    P_WW = P[states][:, states].toarray()
    if len(out) == 0:
        return states, P_WW
    P_WO = P[states][:, out]
    P_OO = P[out][:, out]
    P_OW = P[out][:, states]
    A = sp.identity(len(out), format="csr") - P_OO
    H = _solve(A, P_OW)
    Phi = P_WW + P_WO @ H
    Phi = np.asarray(Phi)
    if np.max(np.abs(Phi.sum(axis=1) - 1.0)) > 1e-9:
        raise EscapingMassError("induced rows are not stochastic")
    return states, Phi


def induced_chain(m: MarkovChain, W: Iterable[int], exact: bool = False) -> MarkovChain:
    """The induced chain on ``W``; state ``i`` is ``sorted(W)[i]``."""
    if exact:
        states, rows = induced_exact(m, W)
        return MarkovChain.from_fractions(rows, name=f"induced{tuple(states)}")
    states, Phi = induced_matrix(m, W)
    Phi = np.clip(Phi, 0.0, 1.0)
    Phi = Phi / Phi.sum(axis=1, keepdims=True)
    return MarkovChain.from_dense(Phi, name=f"induced{tuple(states)}")


def _fraction_solve(A, B):
    """Gauss-Jordan over Fractions; A square (list of lists), B list of lists."""
    n = len(A)
    M = [list(A[i]) + list(B[i]) for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def induced_exact(m: MarkovChain, W: Iterable[int]):
    """Induced chain rows as Fractions (rational chains only)."""
    rows = _exact_rows(m)
    states = _as_set(W, m.n)
    if not _reaches(m, states).all():
        raise EscapingMassError("W is not reached with probability 1 from every state")
    out = [x for x in range(m.n) if x not in set(states)]
    idx = {x: i for i, x in enumerate(out)}
    A = [[Fraction(int(i == j)) - rows[x].get(y, 0) for j, y in enumerate(out)]
         for i, x in enumerate(out)]
    B = [[rows[x].get(w, Fraction(0)) for w in states] for x in out]
    H = _fraction_solve(A, B) if out else []
    result = []
    for u in states:
        r = {}
        for j, w in enumerate(states):
            val = rows[u].get(w, Fraction(0))
            for x, p in rows[u].items():
                if x in idx:
                    val += p * H[idx[x]][j]
            if val:
                r[j] = val
        result.append(r)
    return states, result


# -- cover probability --------------------------------------------------

def cover_probability(m: MarkovChain, start, W: Iterable[int], horizon: int,
                      include_start: bool = False, exact: bool = False):
    """Exact ``Pr(X_[M] ⊇ W)`` by DP over (state, covered subset of W).

    With ``include_start`` the start state counts toward coverage.
    """
    start = StartRule.coerce(start)
    targets = _as_set(W, m.n)
    if horizon < 0:
        raise PreconditionError("horizon must be nonnegative")
    k = len(targets)
    if k > COVER_MAX_TARGETS:
        raise BudgetError(f"|W|={k} exceeds the exact budget of {COVER_MAX_TARGETS}; "
                          "use Monte Carlo (estimate_cover / --mc)")
    if exact:
        return _cover_exact(m, start, targets, horizon, include_start)
    if m.n * (1 << k) > COVER_MAX_STATES:
        raise BudgetError(f"n*2^|W| = {m.n * (1 << k)} states exceeds {COVER_MAX_STATES}; "
                          "use Monte Carlo (estimate_cover / --mc)")
    if k == 0:
        return 1.0
    bit_of = np.full(m.n, -1, dtype=np.int64)
    bit_of[targets] = np.arange(k)
    init = start.vector(m.n)
    return float(kernels.cover_dp(m.indptr, m.indices, m.probs, init, bit_of,
                                  k, int(horizon), bool(include_start)))


def _cover_exact(m, start, targets, horizon, include_start):
    if m.n > EXACT_MAX_STATES:
        raise BudgetError(f"rational mode is limited to n <= {EXACT_MAX_STATES}")
    rows = _exact_rows(m)
    bit = {w: 1 << i for i, w in enumerate(targets)}
    full = (1 << len(targets)) - 1
    cur = {}
    for x, p in start.exact_vector(m.n).items():
        key = (x, bit.get(x, 0) if include_start else 0)
        cur[key] = cur.get(key, 0) + p
    for _ in range(horizon):
        nxt = {}
        for (x, mask), px in cur.items():
            for y, p in rows[x].items():
                key = (y, mask | bit.get(y, 0))
                nxt[key] = nxt.get(key, 0) + px * p
        cur = nxt
    return sum((p for (x, mask), p in cur.items() if mask == full), Fraction(0))


def enumerate_cover(m: MarkovChain, start, W, horizon, include_start=False, exact=True):
    """Brute-force oracle: sum the weights of every positive-probability walk."""
    start = StartRule.coerce(start)
    targets = set(int(w) for w in W)
    rows = m.exact if exact else [dict(zip(*map(list, m.row(u)))) for u in range(m.n)]
    init = start.exact_vector(m.n) if exact else {
        i: float(p) for i, p in enumerate(start.vector(m.n)) if p > 0}
    total = Fraction(0) if exact else 0.0

    def walk(x, weight, seen, left):
        nonlocal total
        if left == 0:
            if targets <= seen:
                total += weight
            return
        for y, p in rows[x].items():
            walk(y, weight * p, seen | {y}, left - 1)

    for x0, p0 in init.items():
        walk(x0, p0, {x0} if include_start else set(), horizon)
    return total


# -- forward absorbing DPs ----------------------------------------------

def avoid_probability(m: MarkovChain, A: Iterable[int], R: int) -> np.ndarray:
    """``Pr_x(X_[R] ∩ A = ∅)`` for every state x."""
    A = _as_set(A, m.n)
    keep = np.ones(m.n)
    keep[A] = 0.0
    P = _op(m)
    h = np.ones(m.n)
    for _ in range(R):
        h = P @ (keep * h)
    return h


def first_visit_probabilities(m: MarkovChain, v: int, R: int, kill_return: bool,
                              targets=None):
    """For every w, ``Pr_v(T_w^+ <= R)``; with ``kill_return`` also require
    ``T_w <= T_v^+`` (the walk is stopped on its first return to v).

    Entry v holds ``Pr_v(T_v^+ <= R)`` in both modes. With ``targets`` only
    those entries are computed (the rest are 0), at cost proportional to
    ``len(targets)``.
    """
    n = m.n
    P = m.matrix
    tg = np.arange(n) if targets is None else np.asarray(sorted(set(int(w) for w in targets)),
                                                          dtype=np.int64)
    out = np.zeros(n)
    if len(tg) == 0:
        return out
    first = P[v].toarray().ravel()
    D = np.tile(first, (len(tg), 1))
    rows = np.arange(len(tg))
    hit = np.zeros(len(tg))
    PT = P.T.tocsr()
    for t in range(1, R + 1):
        if t > 1:
            D = (PT @ D.T).T
        hit += D[rows, tg]
        D[rows, tg] = 0.0
        if kill_return:
            D[:, v] = 0.0
    out[tg] = hit
    return out


def hit_before_return(m: MarkovChain, v: int, w: int) -> float:
    """``Pr_v(T_w < T_v^+)`` (no horizon) by one absorbing linear solve."""
    if v == w:
        raise PreconditionError("v and w must differ")
    n = m.n
    keep = np.array([x for x in range(n) if x not in (v, w)], dtype=np.int64)
    P = m.matrix
    h = np.zeros(n)
    h[w] = 1.0
    if len(keep):
        A = sp.identity(len(keep), format="csr") - P[keep][:, keep]
        b = P[keep][:, [w]].toarray().ravel()
        reach = _reaches(m, [v, w])
        if not reach[keep].all():
            raise EscapingMassError("the walk can get stuck away from v and w")
        h[keep] = np.asarray(_solve(A, b[:, None])).ravel()
    return float(P[v].toarray().ravel() @ h)


@dataclass(frozen=True)
class HittingReport:
    source: int
    targets: tuple
    horizon: int
    hit_dist: tuple        # Pr(T_B = t), t = 0..R, then Pr(T_B > R)
    hit_plus_dist: tuple   # Pr(T_B^+ = t), t = 0..R (t=0 is 0), then Pr(> R)
    before_return: dict    # w -> Pr_v(T_w <= min{R, T_v^+})

    def to_dict(self):
        d = asdict(self)
        d["before_return"] = {str(k): v for k, v in self.before_return.items()}
        return d


def hitting_stats(m: MarkovChain, v: int, targets: Iterable[int], R: int) -> HittingReport:
    if R < 1:
        raise PreconditionError("R must be at least 1")
    B = _as_set(targets, m.n)
    inB = np.zeros(m.n, dtype=bool)
    inB[B] = True
    P = _op(m)

    def first_passage(x0):
        out = [0.0] * (R + 1)
        x = x0.copy()
        for t in range(1, R + 1):
            x = x @ P
            out[t] = float(x[inB].sum())
            x[inB] = 0.0
        return out, float(x.sum())

    e = np.zeros(m.n)
    e[v] = 1.0
    plus, plus_tail = first_passage(e)
    if inB[v]:
        dist, tail = [1.0] + [0.0] * R, 0.0
    else:
        dist, tail = plus, plus_tail
    before = first_visit_probabilities(m, v, R, kill_return=True)
    br = {w: float(before[w]) for w in B if w != v}
    return HittingReport(v, tuple(B), R, tuple(dist) + (tail,),
                         tuple(plus) + (plus_tail,), br)


@dataclass(frozen=True)
class BallSets:
    center: int
    radius: int
    threshold: float
    B: frozenset
    Bprime: frozenset

    def to_dict(self):
        return {"center": self.center, "radius": self.radius, "threshold": self.threshold,
                "B": sorted(self.B), "Bprime": sorted(self.Bprime)}


def ball_sets(m: MarkovChain, v: int, R: int, delta: float) -> BallSets:
    """``B_v(R)`` and ``B'_v(R)`` with strict ``> delta/2`` membership."""
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    if delta >= 2:
        # threshold delta/2 >= 1 is never exceeded
        return BallSets(v, R, delta, frozenset(), frozenset())
    visit = first_visit_probabilities(m, v, R, kill_return=False)
    before = first_visit_probabilities(m, v, R, kill_return=True)
    B = frozenset(int(w) for w in range(m.n) if w != v and visit[w] > delta / 2)
    Bp = frozenset(int(w) for w in range(m.n) if w != v and before[w] > delta / 2)
    return BallSets(v, R, delta, B, Bp)


# -- return times and recurrence ----------------------------------------

def return_time_cdf(m: MarkovChain, horizons) -> np.ndarray:
    """``Pr_v(T_v^+ <= h)`` for every state v and each horizon h.

    Forward DP when the step budget allows; for longer horizons the tail is
    evaluated spectrally on the chain killed at v (reversible chains) or by
    repeated squaring (otherwise).
    """
    hs = [int(h) for h in horizons]
    n = m.n
    out = np.zeros((n, len(hs)))
    if not hs:
        return out
    hmax = max(hs)
    nnz = len(m.probs)
    if hmax * n * max(nnz, n) <= DP_STEP_BUDGET:
        P = _op(m)
        D = P.toarray() if sp.issparse(P) else P.copy()
        ret = np.zeros(n)
        diag = np.arange(n)
        want = {}
        for j, h in enumerate(hs):
            want.setdefault(h, []).append(j)
        for t in range(1, hmax + 1):
            if t > 1:
                D = D @ P
            ret += D[diag, diag]
            D[diag, diag] = 0.0
            for j in want.get(t, ()):
                out[:, j] = ret
        return np.minimum(out, 1.0)
    for v in range(n):
        out[v] = 1.0 - _no_return_tail(m, v, hs)
    return np.clip(out, 0.0, 1.0)


def _no_return_tail(m: MarkovChain, v: int, hs) -> np.ndarray:
    """``Pr_v(T_v^+ > t)`` for each t in ``hs`` (long horizons)."""
    n = m.n
    keep = np.array([x for x in range(n) if x != v])
    P = m.dense()
    a = P[v, keep]
    Q = P[np.ix_(keep, keep)]
    out = np.ones(len(hs))
    if m.stationary is not None and m.reversible:
        pi = m.stationary[keep]
        s = np.sqrt(pi)
        S = (s[:, None] * Q) / s[None, :]
        S = 0.5 * (S + S.T)
        lam, U = np.linalg.eigh(S)
        weight = (U.T @ (a / s)) * (U.T @ s)
        mag = np.abs(lam)
        neg = lam < 0
        for j, t in enumerate(hs):
            if t <= 0:
                continue
            e = t - 1
            with np.errstate(under="ignore"):
                pw = mag ** float(e)
            if e % 2:
                pw = np.where(neg, -pw, pw)
            out[j] = float(np.sum(weight * pw))
        return np.clip(out, 0.0, 1.0)
    if n > 600:
        raise BudgetError("return-time tail for large non-reversible chains is out of budget")
    for j, t in enumerate(hs):
        if t <= 0:
            continue
        Qt = np.linalg.matrix_power(Q, int(t) - 1)
        out[j] = float(a @ Qt.sum(axis=1))
    return np.clip(out, 0.0, 1.0)


def classify_recurrent(m: MarkovChain, delta: float, R: int) -> frozenset:
    """States with ``Pr_v(T_v^+ <= R) > 1 - delta``."""
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    if R < 1:
        raise PreconditionError("R must be at least 1")
    cdf = return_time_cdf(m, [R])[:, 0]
    return frozenset(int(v) for v in np.flatnonzero(cdf > 1 - delta))


# -- reversible-chain inequalities --------------------------------------

@dataclass(frozen=True)
class ReturnInequalities:
    lhs_af: float
    rhs_af: float
    pass_af: bool
    pass_mono: bool
    mono_chain: tuple
    lhs_pi_v: float        # p^{t+s}(v,w)/pi_v, the source-normalized variant
    pass_pi_v: bool

    def to_dict(self):
        return asdict(self)


def check_return_inequalities(m: MarkovChain, v: int, w: int, t: int, s: int,
                              slack: float = 1e-9) -> ReturnInequalities:
    """Evaluate ``p^{t+s}(v,w)/pi_w <= sqrt(p^{2t}(v,v)/pi_v * p^{2s}(w,w)/pi_w)``
    and the even-return monotonicity chain ``p^0(v,v) >= p^2(v,v) >= ...``.

    ``p^{t+s}(v,w)/pi_w`` is the symmetric kernel of a reversible chain. The
    variant normalized by ``pi_v`` is reported too; it fails whenever
    ``pi_v`` is much smaller than ``pi_w`` (a star leaf and its center).
    """
    pi = require_reversible(m)
    P = _op(m)
    horizon = max(2 * t, 2 * s, t + s) + 2
    rows_v = [np.eye(m.n)[v]]
    rows_w = [np.eye(m.n)[w]]
    for _ in range(horizon):
        rows_v.append(rows_v[-1] @ P)
        rows_w.append(rows_w[-1] @ P)
    lhs = rows_v[t + s][w] / pi[w]
    lhs_v = rows_v[t + s][w] / pi[v]
    rhs = math.sqrt(max(rows_v[2 * t][v] / pi[v] * rows_w[2 * s][w] / pi[w], 0.0))
    chain = tuple(float(rows_v[2 * j][v]) for j in range(horizon // 2 + 1))
    mono = all(b <= a + slack for a, b in zip(chain, chain[1:]))
    return ReturnInequalities(float(lhs), float(rhs), bool(lhs <= rhs + slack), mono, chain,
                              float(lhs_v), bool(lhs_v <= rhs + slack))


# -- spectra ------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: tuple
    gap_quantity: float
    bounds: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def spectral_gap(m: MarkovChain) -> SpectralReport:
    """Eigenvalues of a reversible chain, descending, via the symmetrized operator."""
    pi = require_reversible(m)
    if m.n > DIRECT_SOLVE_MAX:
        raise BudgetError(f"full spectrum limited to n <= {DIRECT_SOLVE_MAX}")
    s = np.sqrt(pi)
    P = m.dense()
    S = (s[:, None] * P) / s[None, :]
    S = 0.5 * (S + S.T)
    lam = np.sort(np.linalg.eigvalsh(S))[::-1]
    gap = float(max(abs(lam[1]), abs(lam[-1]))) if m.n > 1 else 0.0
    return SpectralReport(tuple(float(x) for x in lam), gap)


def is_eps_expander(report: SpectralReport, eps: float) -> bool:
    return report.gap_quantity < 1.0 - eps


@dataclass(frozen=True)
class ExpanderBounds:
    t: int
    eps: float
    deviation: tuple       # per v: |p^t(v,S) - pi_S|
    tail_bound: tuple      # per v: sqrt(pi_S/pi_v)(1-eps)^t
    max_deviation: float
    tail_ok: bool
    exact_tail: tuple      # per v: Pr_v(T_S > t)
    hitting_bound: float   # (1 - pi_S/2)^floor(t/s), s = ceil(2 log n / eps)
    hitting_ok: bool
    hitting_bound_smooth: float   # (1 - pi_S/2)^(eps t / (2 log n))
    hitting_smooth_ok: bool

    def to_dict(self):
        return asdict(self)


def expander_bounds(m: MarkovChain, S: Iterable[int], t: int, eps: float,
                    report: SpectralReport | None = None) -> ExpanderBounds:
    """Exact deviation and hitting tails next to the expander tail/hitting bounds.

    The hitting bound comes from sampling the walk every ``s`` steps, which
    gives the exponent ``floor(t/s)``. The smooth exponent ``eps t/(2 log n)``
    is also reported; it is below 1 for every t > 0 and so fails whenever S
    cannot be reached within t steps.
    """
    report = report or spectral_gap(m)
    if not is_eps_expander(report, eps):
        raise PreconditionError(f"chain is not a {eps}-expander "
                                f"(max|lambda| = {report.gap_quantity:.6g})")
    if m.n < 2:
        raise PreconditionError("need at least two states")
    S = _as_set(S, m.n)
    pi = stationary(m)
    piS = float(pi[S].sum())
    P = _op(m)
    Pt = np.eye(m.n)
    for _ in range(t):
        Pt = Pt @ P
    dev = np.abs(Pt[:, S].sum(axis=1) - piS)
    bound = np.sqrt(piS / pi) * (1.0 - eps) ** t
    tail = avoid_probability(m, S, t)
    inS = np.zeros(m.n, dtype=bool)
    inS[S] = True
    tail[inS] = 0.0  # T_S = 0 from inside S
    stride = math.ceil(2.0 * math.log(m.n) / eps)
    hb = (1.0 - piS / 2.0) ** (t // stride)
    smooth = (1.0 - piS / 2.0) ** (eps * t / (2.0 * math.log(m.n)))
    return ExpanderBounds(t, eps, tuple(dev.tolist()), tuple(bound.tolist()),
                          float(dev.max()), bool(np.all(dev <= bound + 1e-12)),
                          tuple(tail.tolist()), float(hb),
                          bool(np.all(tail <= hb + 1e-12)), float(smooth),
                          bool(np.all(tail <= smooth + 1e-12)))


# -- degree-split machinery ---------------------------------------------

@dataclass(frozen=True)
class HeavyWitness:
    B: tuple
    S: tuple
    T: int
    W: tuple
    hit_probability: dict   # v in B -> Pr_v(X_[T] ∩ S != ∅)
    half_B_met: bool

    def to_dict(self):
        d = asdict(self)
        d["hit_probability"] = {str(k): v for k, v in self.hit_probability.items()}
        return d


def heavy_witness(g: Graph, big_degree: float, small_degree: float,
                  gamma: float = GAMMA, horizon: int | None = None) -> HeavyWitness:
    """Heavy vertices whose walks rarely reach low-degree vertices quickly.

    ``B = {deg > big_degree}``, ``S = {deg <= small_degree}``,
    ``T = floor(gamma*big_degree/(4*small_degree))`` unless ``horizon`` is
    given, and ``W = {v in B : Pr_v(X_[T] ∩ S != ∅) < 1/2}``.
    """
    from .chain import rw_from_graph
    if small_degree > big_degree:
        raise PreconditionError("need small_degree <= big_degree")
    if horizon is None:
        T = int(math.floor(gamma * big_degree / (4.0 * small_degree)))
    else:
        T = int(horizon)
    if T <= 0:
        raise DegenerateHorizonError(f"T = floor({gamma}*{big_degree}/(4*{small_degree})) is 0")
    deg = g.degrees
    B = [int(v) for v in np.flatnonzero(deg > big_degree)]
    S = [int(v) for v in np.flatnonzero(deg <= small_degree)]
    if not B:
        return HeavyWitness((), tuple(S), T, (), {}, True)
    m = rw_from_graph(g)
    reach = 1.0 - avoid_probability(m, S, T)
    probs = {v: float(reach[v]) for v in B}
    W = tuple(v for v in B if probs[v] < 0.5)
    return HeavyWitness(tuple(B), tuple(S), T, W, probs, len(W) >= len(B) / 2)


def degree_split_mass(g: Graph, big_degree: float, small_degree: float, t: int):
    """``(sum_{v in B} p^t(v,S), (d/Delta)|S|)`` for RW on g."""
    from .chain import rw_from_graph
    m = rw_from_graph(g)
    deg = g.degrees
    B = np.flatnonzero(deg > big_degree)
    S = np.flatnonzero(deg <= small_degree)
    P = _op(m)
    Pt = np.eye(m.n)
    for _ in range(t):
        Pt = Pt @ P
    lhs = float(Pt[np.ix_(B, S)].sum()) if len(B) and len(S) else 0.0
    return lhs, (small_degree / big_degree) * len(S)
