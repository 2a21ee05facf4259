"""Cover-certificate martingales and their concentration apparatus.

For a target set W with ``X_0 ∉ W`` and a constant ``K`` (``L = e^K``)::

    H_v(t)  = prod_{i<=t} (1 - phi(X_i, v)),    H_v(-1) = 1
    r_v     = min{t : H_v(t) < lambda / L}
    xi_s^v  = 1{T_v > s ∧ r_v} / H_v(s ∧ r_v - 1),    xi_s = sum_v xi_s^v

``lambda = 1 - max{phi(v, w) : v in V, v != w in W}``. Paper-scale constants
(K around 1e7) are only ever handled in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .chain import MarkovChain, StartRule, WalkTrace
from .errors import BudgetError, DegenerateLambdaError, PreconditionError

GAMMA = 0.1
K_MAX = 500.0
STEP_TOL = 1e-9
ASSOC_MAX_STATES = 8
ASSOC_MAX_HORIZON = 16
ASSOC_MAX_I = 3


# -- parameters ---------------------------------------------------------

@dataclass(frozen=True)
class MartingaleParams:
    """Log-space parameter pack. ``log_*`` fields are natural logs."""

    K: float
    lam: float
    C: float
    beta: float
    log_L: float
    log_p: float
    log_eps: float
    log_delta: float
    log_theta: float
    log_d: float
    log_varrho: float
    log_Delta: float
    log_D: float

    @property
    def eps(self) -> float:
        return math.exp(self.log_eps)

    @property
    def delta(self) -> float:
        return math.exp(self.log_delta)

    @property
    def theta(self) -> float:
        return math.exp(self.log_theta)

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for k in ("eps", "delta", "theta"):
            d[k] = getattr(self, k)
        d["L"] = math.exp(self.log_L) if self.log_L < 700 else math.inf
        return d


def params_from_K(K: float, lam: float, C: float = 1.0, beta: float = 0.5,
                  D: float = 1.0, gamma: float = GAMMA) -> MartingaleParams:
    """Derived constants for a given K.

    ``eps = lambda p / 5``, ``delta = eps/K``, ``theta = delta^2``,
    ``d = 1/delta``, ``varrho = gamma K p / 160`` and
    ``Delta = 16 D d^2 / (gamma varrho)``.
    """
    if K <= 0:
        raise PreconditionError("K must be positive")
    if not 0 < lam <= 1:
        raise PreconditionError("lambda must lie in (0, 1]")
    log_p = -K
    log_eps = math.log(lam / 5.0) + log_p
    log_delta = log_eps - math.log(K)
    log_theta = 2 * log_delta
    log_d = -log_delta
    log_varrho = math.log(gamma * K / 160.0) + log_p
    log_D = math.log(D)
    log_Delta = math.log(16.0) + log_D + 2 * log_d - math.log(gamma) - log_varrho
    return MartingaleParams(float(K), float(lam), float(C), float(beta), float(K), log_p,
                            log_eps, log_delta, log_theta, log_d, log_varrho, log_Delta, log_D)


def paper_K(C: float, beta: float) -> float:
    return max((20.0 * math.e * (64.0 + C)) ** 2, math.log(1.0 / beta))


def paper_params(C: float, beta: float, lam: float, D: float | None = None) -> MartingaleParams:
    """Paper-scale constants: ``K = max{[20e(64+C)]^2, log(1/beta)}``.

    ``D`` (the degree scale entering Delta) defaults to C.
    """
    if C < 1:
        raise PreconditionError("C must be at least 1")
    if not 0 < beta < 1:
        raise PreconditionError("beta must lie in (0, 1)")
    return params_from_K(paper_K(C, beta), lam, C, beta, C if D is None else D)


# -- lambda and H -------------------------------------------------------

def lambda_of(m: MarkovChain, W: Iterable[int], exclude_pendant: bool = False) -> float:
    """``1 - max{phi(v, w) : v != w in W}``; with ``exclude_pendant`` only
    sources of degree at least 2 count."""
    W = sorted({int(w) for w in W})
    if not W:
        raise PreconditionError("W must be nonempty")
    deg = np.diff(m.indptr)
    if exclude_pendant and m.graph is not None:
        deg = m.graph.degrees
    best = 0.0
    inW = np.zeros(m.n, dtype=bool)
    inW[W] = True
    for v in range(m.n):
        if exclude_pendant and deg[v] < 2:
            continue
        idx, pr = m.row(v)
        mask = inW[idx] & (idx != v)
        if mask.any():
            best = max(best, float(pr[mask].max()))
    lam = 1.0 - best
    if lam <= 0.0:
        raise DegenerateLambdaError("some state moves into W with probability 1 "
                                    "(lambda = 0); consider exclude_pendant")
    return lam


def _check_K(K: float) -> float:
    if not 0 < K <= K_MAX:
        raise PreconditionError(f"K must lie in (0, {K_MAX}] so that L = e^K is representable")
    return math.exp(K)


@dataclass
class MartingaleTrace:
    W: tuple
    m: int
    lam: float
    K: float
    horizon: int
    H: dict               # v -> [H_v(0), ..., H_v(M)]
    r: dict               # v -> r_v or None
    T: dict               # v -> T_v or None
    xi_v: dict            # v -> [xi_0^v, ..., xi_M^v]
    xi: list
    Q: dict               # v -> True/False, None if undetermined by the horizon
    R: dict
    Q_star: dict
    frozen: bool

    @property
    def L(self) -> float:
        return math.exp(self.K)

    @property
    def increment_bound(self) -> float:
        return self.L / self.lam ** 2

    def max_increment(self) -> float:
        x = np.asarray(self.xi)
        return float(np.abs(np.diff(x)).max()) if len(x) > 1 else 0.0

    def covered(self) -> bool:
        return all(t is not None for t in self.T.values())

    def to_dict(self):
        key = lambda d: {str(k): v for k, v in d.items()}  # noqa: E731
        return {"W": list(self.W), "m": self.m, "lambda": self.lam, "K": self.K,
                "horizon": self.horizon, "H": key(self.H), "r": key(self.r), "T": key(self.T),
                "xi_v": key(self.xi_v), "xi": self.xi, "Q": key(self.Q), "R": key(self.R),
                "Q_star": key(self.Q_star), "frozen": self.frozen}


def _phi_cols(m: MarkovChain, W) -> np.ndarray:
    """Dense columns ``phi(., v)`` for v in W, shape (n, |W|)."""
    return m.matrix[:, list(W)].toarray()


def _xi_path(states: Sequence[int], cols: np.ndarray, W, thresh: float):
    """Core recursion. Returns per-v H, r, T, xi arrays for the given path."""
    s_len = len(states)
    k = len(W)
    x = np.asarray(states, dtype=np.int64)
    H = np.cumprod(1.0 - cols[x], axis=0)                 # (s_len, k): H_v(t)
    Hm1 = np.vstack([np.ones((1, k)), H[:-1]])            # H_v(t-1)
    r = np.full(k, -1, dtype=np.int64)
    T = np.full(k, -1, dtype=np.int64)
    for j, v in enumerate(W):
        below = np.flatnonzero(H[:, j] < thresh)
        if below.size:
            r[j] = below[0]
        hit = np.flatnonzero(x == v)
        if hit.size:
            T[j] = hit[0]
    t = np.arange(s_len)
    big = s_len + 1
    r_eff = np.where(r >= 0, r, big)
    T_eff = np.where(T >= 0, T, big)
    stop = np.minimum(t[:, None], r_eff[None, :])          # s ∧ r_v
    alive = T_eff[None, :] > stop
    denom = Hm1[np.minimum(stop, s_len - 1), np.arange(k)[None, :]]
    xi = np.where(alive, 1.0 / denom, 0.0)
    return H, r, T, xi


def build_xi(m: MarkovChain, trace, W: Iterable[int], K: float = 1.0,
             lam: float | None = None) -> MartingaleTrace:
    """All martingale sequences along one walk."""
    L = _check_K(K)
    W = tuple(sorted({int(w) for w in W}))
    states = trace.states if isinstance(trace, WalkTrace) else tuple(int(s) for s in trace)
    if not W:
        raise PreconditionError("W must be nonempty")
    if states[0] in W:
        raise PreconditionError("X_0 must lie outside W")
    lam = lambda_of(m, W) if lam is None else lam
    H, r, T, xi = _xi_path(states, _phi_cols(m, W), W, lam / L)
    M = len(states) - 1
    Hd, rd, Td, xv, Q, R, Qs = {}, {}, {}, {}, {}, {}, {}
    frozen = True
    for j, v in enumerate(W):
        Hd[v] = H[:, j].tolist()
        rd[v] = int(r[j]) if r[j] >= 0 else None
        Td[v] = int(T[j]) if T[j] >= 0 else None
        xv[v] = xi[:, j].tolist()
        R[v] = rd[v] is not None
        if rd[v] is not None:
            Q[v] = Td[v] is None or Td[v] > rd[v]
        elif Td[v] is not None:
            Q[v] = False
        else:
            Q[v] = None
            frozen = False
        Qs[v] = bool(Q[v]) and R[v]
    return MartingaleTrace(W, len(W), float(lam), float(K), M, Hd, rd, Td, xv,
                           xi.sum(axis=1).tolist(), Q, R, Qs, frozen)


def xi_value(m: MarkovChain, history: Sequence[int], W, K: float, lam: float) -> float:
    """``xi_s`` at the end of ``history``."""
    W = tuple(sorted(W))
    _, _, _, xi = _xi_path(history, _phi_cols(m, W), W, lam / math.exp(K))
    return float(xi[-1].sum())


@dataclass(frozen=True)
class StepCheck:
    expected_next: float
    current: float
    passed: bool

    def to_dict(self):
        return {"expected_next": self.expected_next, "current": self.current,
                "pass": self.passed}


def _phi_rows(m: MarkovChain, W) -> list:
    """``phi(x, v)`` for v in W as nested Python lists, one row per x."""
    return _phi_cols(m, W).tolist()


def _xi_init(x0: int, phi_rows, W, thresh: float) -> list:
    """Per-v state ``[alive, frozen, H(s-1), H(s)]`` at s = 0."""
    out = []
    for j in range(len(W)):
        h = 1.0 - phi_rows[x0][j]
        out.append([True, h < thresh, 1.0, h])
    return out


def _xi_extend(state, x: int, phi_rows, W, thresh: float) -> list:
    out = []
    for j, (alive, frozen, hp, hc) in enumerate(state):
        if frozen or not alive:
            out.append([alive, frozen, hp, hc])
        elif x == W[j]:
            out.append([False, False, hc, hc])
        else:
            h = hc * (1.0 - phi_rows[x][j])
            out.append([True, h < thresh, hc, h])
    return out


def _xi_sum(state) -> float:
    return sum(1.0 / hp for alive, _, hp, _ in state if alive)


def check_martingale_step(m: MarkovChain, history: Sequence[int], W: Iterable[int],
                          K: float = 1.0, lam: float | None = None) -> StepCheck:
    """Exact one-step expectation ``E[xi_{s+1} | history]`` against ``xi_s``."""
    _check_K(K)
    W = tuple(sorted({int(w) for w in W}))
    history = [int(h) for h in history]
    if history[0] in W:
        raise PreconditionError("X_0 must lie outside W")
    lam = lambda_of(m, W) if lam is None else lam
    rows = _phi_rows(m, W)
    thresh = lam / math.exp(K)
    state = _xi_init(history[0], rows, W, thresh)
    for x in history[1:]:
        state = _xi_extend(state, x, rows, W, thresh)
    cur = _xi_sum(state)
    idx, pr = m.row(history[-1])
    nxt = 0.0
    for y, p in zip(idx.tolist(), pr.tolist()):
        nxt += p * _xi_sum(_xi_extend(state, y, rows, W, thresh))
    return StepCheck(float(nxt), cur, bool(abs(nxt - cur) <= STEP_TOL * max(1.0, cur)))


@dataclass(frozen=True)
class TreeCheck:
    histories: int
    failures: int
    max_error: float
    expected_final: float     # E xi_depth over all walks of the full depth

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self):
        return {"histories": self.histories, "failures": self.failures,
                "max_error": self.max_error, "expected_final": self.expected_final,
                "pass": self.passed}


def check_martingale_tree(m: MarkovChain, start: int, W: Iterable[int], depth: int,
                          K: float = 1.0, lam: float | None = None) -> TreeCheck:
    """Step check at every history ``X_0..X_s`` with ``s < depth`` from ``start``.

    Walks the full trajectory tree depth-first; each internal node costs
    one extension per out-edge.
    """
    _check_K(K)
    W = tuple(sorted({int(w) for w in W}))
    if int(start) in W:
        raise PreconditionError("X_0 must lie outside W")
    lam = lambda_of(m, W) if lam is None else lam
    rows = _phi_rows(m, W)
    thresh = lam / math.exp(K)
    out = [(r[0].tolist(), r[1].tolist()) for r in (m.row(x) for x in range(m.n))]
    checked = fails = 0
    worst = 0.0
    final = 0.0
    stack = [(int(start), _xi_init(int(start), rows, W, thresh), 1.0, 0)]
    while stack:
        x, state, w, s = stack.pop()
        cur = _xi_sum(state)
        if s == depth:
            final += w * cur
            continue
        nxt = 0.0
        for y, p in zip(*out[x]):
            st = _xi_extend(state, y, rows, W, thresh)
            nxt += p * _xi_sum(st)
            stack.append((y, st, w * p, s + 1))
        err = abs(nxt - cur)
        checked += 1
        worst = max(worst, err)
        fails += err > STEP_TOL * max(1.0, cur)
    return TreeCheck(checked, fails, worst, final)


# -- S_k^I --------------------------------------------------------------

def s_sequence(m: MarkovChain, states: Sequence[int], I: Iterable[int], K: float,
               lam: float) -> np.ndarray:
    """``S_k^I`` for k = 0..s along ``states``: the product of the ``xi^v``."""
    I = tuple(sorted(I))
    _, _, _, xi = _xi_path(states, _phi_cols(m, I), I, lam / math.exp(K))
    return np.prod(xi, axis=1)


@dataclass(frozen=True)
class SuperMartingaleReport:
    S: tuple
    expected_next: tuple
    passed: bool
    max_excess: float

    def to_dict(self):
        return {"S": list(self.S), "expected_next": list(self.expected_next),
                "pass": self.passed, "max_excess": self.max_excess}


def super_martingale_s(m: MarkovChain, trace, I: Iterable[int], K: float = 1.0,
                       W: Iterable[int] | None = None) -> SuperMartingaleReport:
    """``S_k^I`` along a trace with the exact check ``E[S_{k+1} | F_k] <= S_k``.

    ``lambda`` is taken from W (defaults to I).
    """
    L = _check_K(K)
    I = tuple(sorted({int(v) for v in I}))
    if not I:
        raise PreconditionError("I must be nonempty")
    states = list(trace.states if isinstance(trace, WalkTrace) else trace)
    lam = lambda_of(m, I if W is None else W)
    if states[0] in I:
        raise PreconditionError("X_0 must lie outside W")
    S = s_sequence(m, states, I, K, lam)
    cols = _phi_cols(m, I)
    exp_next = []
    excess = 0.0
    for k in range(len(states) - 1):
        idx, pr = m.row(states[k])
        e = 0.0
        for y, p in zip(idx, pr):
            _, _, _, xi = _xi_path(states[:k + 1] + [int(y)], cols, I, lam / L)
            e += p * float(np.prod(xi[-1]))
        exp_next.append(e)
        excess = max(excess, e - S[k] - STEP_TOL * max(1.0, S[k]))
    return SuperMartingaleReport(tuple(S.tolist()), tuple(exp_next), excess <= 0.0,
                                 float(max(excess, 0.0)))


# -- Lemma-style association bound ---------------------------------------

@dataclass(frozen=True)
class AssocReport:
    I: tuple
    K: float
    horizon: int
    prob_q_star: float        # exact Pr(∩ Q_v^*)
    prob_q_upper: float       # exact upper bracket for Pr(∩ Q_v)
    p_power: float            # p^{|I|}
    expected_s: float         # E S_M^I
    supermartingale_ok: bool
    max_excess: float
    states_explored: int
    passed: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"pass": self.passed}


def assoc_bound(m: MarkovChain, start, W: Iterable[int], I: Iterable[int], K: float,
                horizon: int, max_states: int = 2_000_000) -> AssocReport:
    """Exact check of ``Pr(∩_{v in I} Q_v) <= p^{|I|}`` with ``p = e^{-K}``.

    Paths are merged on (current state, per-v status), where a status is
    either running with the exact pair ``(H_v(k-1), H_v(k))`` or frozen at
    ``H_v(r_v - 1)``. Paths that hit some v before ``r_v`` leave the event and
    are dropped. Every merged state is also used to check the one-step
    supermartingale inequality for ``S_k^I``.

    ``Q_v`` needs the infinite future. Paths with every v frozen by the
    horizon are exactly ``∩ Q_v^*``. For a path still running on
    ``J ⊆ I`` the supermartingale property from time M gives::

        Pr(∩ Q_v | F_M) <= prod_{v in J} min(p, H_v(M)) / H_v(M-1)

    and the sum of these conditional bounds is the reported upper bracket.
    """
    L = _check_K(K)
    start = StartRule.coerce(start)
    W = tuple(sorted({int(w) for w in W}))
    I = tuple(sorted({int(v) for v in I}))
    if not set(I) <= set(W):
        raise PreconditionError("I must be a subset of W")
    if m.n > ASSOC_MAX_STATES or horizon > ASSOC_MAX_HORIZON or len(I) > ASSOC_MAX_I:
        raise BudgetError(f"exact association check needs n <= {ASSOC_MAX_STATES}, "
                          f"M <= {ASSOC_MAX_HORIZON}, |I| <= {ASSOC_MAX_I}")
    p = math.exp(-K)
    if not I:
        return AssocReport(I, K, horizon, 1.0, 1.0, 1.0, 1.0, True, 0.0, 0, True)
    lam = lambda_of(m, W)
    exact = m.exact is not None
    one = Fraction(1) if exact else 1.0
    rows = m.exact if exact else [dict(zip(*map(list, m.row(u)))) for u in range(m.n)]
    thresh = lam / L
    phi = [[rows[x].get(v, 0) for v in I] for x in range(m.n)]

    def advance(x, status):
        """Status after arriving at x; None if some v in I is hit while running."""
        out = []
        for j, v in enumerate(I):
            st = status[j]
            if st[0] == "f":
                out.append(st)
                continue
            if x == v:
                return None
            prev = st[2]
            cur = prev * (one - phi[x][j])
            out.append(("f", prev) if cur < thresh else ("r", prev, cur))
        return tuple(out)

    def s_of(status):
        val = 1.0
        for st in status:
            val /= float(st[1])
        return val

    layer = {}
    for x0, p0 in start.exact_vector(m.n).items():
        if x0 in W:
            raise PreconditionError("X_0 must lie outside W")
        st = advance(x0, tuple(("r", one, one) for _ in I))
        if st is not None:
            key = (x0, st)
            layer[key] = layer.get(key, 0.0) + float(p0)
    explored = len(layer)
    excess = 0.0
    for _ in range(horizon):
        nxt = {}
        for (x, status), w in layer.items():
            s_now = s_of(status)
            e_next = 0.0
            for y, py in rows[x].items():
                st = advance(y, status)
                if st is None:
                    continue
                e_next += float(py) * s_of(st)
                key = (y, st)
                nxt[key] = nxt.get(key, 0.0) + w * float(py)
            excess = max(excess, e_next - s_now - STEP_TOL * max(1.0, s_now))
        layer = nxt
        explored += len(layer)
        if explored > max_states:
            raise BudgetError(f"association DP exceeded {max_states} merged states")
    q_star = 0.0
    upper = 0.0
    exp_s = 0.0
    for (x, status), w in layer.items():
        exp_s += w * s_of(status)
        running = [st for st in status if st[0] == "r"]
        if not running:
            q_star += w
            upper += w
            continue
        c = 1.0
        for st in running:
            c *= min(p, float(st[2])) / float(st[1])
        upper += w * min(1.0, c)
    p_pow = p ** len(I)
    return AssocReport(I, float(K), int(horizon), q_star, upper, p_pow, exp_s,
                       excess <= 0.0, float(max(excess, 0.0)), explored,
                       bool(upper <= p_pow + 1e-12 and q_star <= upper + 1e-15))


# -- concentration ------------------------------------------------------

def azuma_bound(k: int, L: float, eta: float) -> float:
    """``exp(-eta^2 / (2 k L^2))``."""
    if k < 1 or L <= 0 or eta < 0:
        raise PreconditionError("need k >= 1, L > 0, eta >= 0")
    return math.exp(-eta * eta / (2.0 * k * L * L))


def alltime_bound(vartheta: float, lam: float, m: int, L: float) -> float:
    """``2 exp(-vartheta^2 lambda^4 m / (8L)^2)``."""
    return 2.0 * math.exp(-vartheta ** 2 * lam ** 4 * m / (8.0 * L) ** 2)


def mbound(L: float, m: int, lam: float) -> float:
    return 2.0 * L * m / lam ** 2


def mass_total(m: MarkovChain, states, W, K, lam) -> tuple:
    """``sum_i sum_v 2 phi(x_{i-1}, v) xi_{i-1}^v`` over v with ``T_v, r_v > i-1``,
    together with the ``xi`` sequence."""
    cols = _phi_cols(m, W)
    H, r, T, xi = _xi_path(states, cols, W, lam / math.exp(K))
    s_len = len(states)
    big = s_len + 1
    stop = np.minimum(np.where(r >= 0, r, big), np.where(T >= 0, T, big))
    x = np.asarray(states[:-1], dtype=np.int64)
    i1 = np.arange(s_len - 1)                                 # i - 1
    live = i1[:, None] < stop[None, :]
    total = float(np.sum(np.where(live, 2.0 * cols[x] * xi[:-1], 0.0)))
    return total, xi.sum(axis=1)


@dataclass
class ConcentrationReport:
    W: tuple
    K: float
    lam: float
    m: int
    horizon: int
    mass_totals: list
    mbound: float
    mbound_ok: bool
    xi_final: list
    tail: list = field(default_factory=list)   # per vartheta rows
    coverage_ok: bool = True

    def to_dict(self):
        return {"W": list(self.W), "K": self.K, "lambda": self.lam, "m": self.m,
                "horizon": self.horizon, "max_mass_total": max(self.mass_totals, default=0.0),
                "mbound": self.mbound, "mbound_ok": self.mbound_ok, "tail": self.tail,
                "coverage_ok": self.coverage_ok, "walks": len(self.mass_totals)}


def concentration_report(m: MarkovChain, paths, W: Iterable[int], K: float = 1.0,
                         varthetas: Sequence[float] = (0.5, 1.0, 2.0)) -> ConcentrationReport:
    """Mass totals against ``2Lm/lambda^2`` and empirical tails of ``xi_M``.

    ``paths`` is an iterable of walks (WalkTrace or state sequences) of a
    common length. Azuma uses the increment bound ``L/lambda^2``. Per
    vartheta, ``pass`` holds when both one-sided tails sit under Azuma and
    ``Pr(|xi_M - m| > vartheta m)`` sits under ``min(2 Azuma, alltime)``.
    ``pass_one_sided_bound`` compares the two-sided frequency with
    ``min(Azuma, alltime)`` instead, which is not a valid bound in general.
    """
    from .mc import empirical_tail_vs_bound
    L = _check_K(K)
    W = tuple(sorted({int(w) for w in W}))
    lam = lambda_of(m, W)
    totals, finals = [], []
    cov_ok = True
    M = None
    for tr in paths:
        states = list(tr.states if isinstance(tr, WalkTrace) else tr)
        if states[0] in W:
            raise PreconditionError("X_0 must lie outside W")
        tot, xi = mass_total(m, states, W, K, lam)
        totals.append(tot)
        finals.append(float(xi[-1]))
        M = len(states) - 1
        if set(W) <= set(states[1:]):
            # covered: xi_M <= (L/lambda) |{v : Q_v^*}|
            mt = build_xi(m, states, W, K, lam)
            nq = sum(mt.Q_star.values())
            cov_ok &= finals[-1] <= (L / lam) * nq + 1e-9
    mb = mbound(L, len(W), lam)
    rows = []
    mm = len(W)
    x = np.asarray(finals)
    for th in varthetas:
        az = azuma_bound(M, L / lam ** 2, th * mm) if M else 1.0
        at = alltime_bound(th, lam, mm, L)
        # the deviation event is two-sided: each one-sided tail is held to
        # Azuma, the union to min(2 Azuma, alltime)
        up = empirical_tail_vs_bound(np.maximum(x - mm, 0.0), 0.0, th * mm, az)
        down = empirical_tail_vs_bound(np.maximum(mm - x, 0.0), 0.0, th * mm, az)
        both = empirical_tail_vs_bound(x, mm, th * mm, min(2.0 * az, at))
        single = empirical_tail_vs_bound(x, mm, th * mm, min(az, at))
        rows.append({"vartheta": th, "azuma": az, "alltime": at,
                     "upper_frequency": up.frequency, "lower_frequency": down.frequency,
                     "pass_upper": up.passed, "pass_lower": down.passed,
                     "pass_one_sided_bound": single.passed,
                     "pass": up.passed and down.passed and both.passed}
                    | {k: v for k, v in both.to_dict().items() if k != "pass"})
    return ConcentrationReport(W, float(K), lam, mm, M or 0, totals, mb,
                               all(t <= mb + 1e-9 for t in totals), finals, rows, cov_ok)


def tech_inequality(p: Sequence[float]) -> tuple:
    """``(f, g, pass)`` with ``f = sum_i p_i prod_{j<i} (1-p_j)^{-1}`` and
    ``g = prod_i (1-p_i)^{-1}``; pass iff ``f <= g - 1 + 1e-12``."""
    p = [float(x) for x in p]
    if any(not 0 <= x < 1 for x in p):
        raise PreconditionError("entries must lie in [0, 1)")
    f = 0.0
    prod = 1.0
    for x in p:
        f += x * prod
        prod /= 1.0 - x
    return f, prod, f <= prod - 1.0 + 1e-12


# -- phi_delta and nets -------------------------------------------------

def phi_delta(m: MarkovChain, Y: Iterable[int], z: int, delta: float) -> float:
    """``sum_{y in Y} 1{phi(y,z) <= delta} phi(y,z)`` with multiplicity."""
    if delta < 0:
        raise PreconditionError("delta must be nonnegative")
    tot = 0.0
    for y in Y:
        q = m.prob(int(y), int(z))
        if q <= delta:
            tot += q
    return tot


def _phi_delta_vec(m: MarkovChain, Y, W, delta):
    """phi_delta(Y, z) for every z in W (vector aligned with W)."""
    if len(Y) == 0:
        return np.zeros(len(W))
    cnt = np.bincount(np.asarray(Y, dtype=np.int64), minlength=m.n).astype(np.float64)
    cols = _phi_cols(m, W)
    cols = np.where(cols <= delta, cols, 0.0)
    return cnt @ cols


@dataclass(frozen=True)
class NetResult:
    success: bool
    Y_prime: tuple
    attempts: int
    failures: dict        # check name -> times it failed
    size: int
    size_limit: float
    hood: int
    hood_limit: float
    overlap: int
    overlap_limit: float

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def sample_net(m: MarkovChain, Y: Sequence[int], Z: Iterable[int], W: Iterable[int],
               delta: float, K: float, M: int, max_retries: int = 1000,
               seed: int = 0) -> NetResult:
    """Random thinning of the multiset Y into a small net.

    Each member of Y is kept independently with probability
    ``min(1, 32 delta / K)``; an attempt succeeds when

    * ``|Y'| < 33 delta M / K``,
    * ``|N(Y') \\ W_0| < 64 m / sqrt(K)`` and
    * ``|N(Y') ∩ Z| > eps m`` with ``eps = delta K``,

    where ``N(Y') = {z in W : phi_delta(Y', z) >= delta}`` and
    ``W_0 = {z in W : phi_delta(Y, z) > sqrt(K)}``. Attempt ``a`` draws from
    the stream ``(seed, a)``.
    """
    from .mc import stream_uniforms
    W = tuple(sorted({int(w) for w in W}))
    Zs = set(int(z) for z in Z)
    if not Zs <= set(W):
        raise PreconditionError("Z must be a subset of W")
    Y = [int(y) for y in Y]
    mm = len(W)
    q = min(1.0, 32.0 * delta / K)
    eps = delta * K
    size_lim = 33.0 * delta * M / K
    hood_lim = 64.0 * mm / math.sqrt(K)
    overlap_lim = eps * mm
    full = _phi_delta_vec(m, Y, W, delta)
    W0 = full > math.sqrt(K)
    inZ = np.array([w in Zs for w in W], dtype=bool)
    fails = {"size": 0, "hood": 0, "overlap": 0}
    last = None
    for a in range(max_retries):
        u = stream_uniforms(seed, a, len(Y))
        Yp = [y for y, x in zip(Y, u) if x < q]
        vals = _phi_delta_vec(m, Yp, W, delta)
        N = vals >= delta
        size, hood, overlap = len(Yp), int((N & ~W0).sum()), int((N & inZ).sum())
        ok_s, ok_h, ok_o = size < size_lim, hood < hood_lim, overlap > overlap_lim
        fails["size"] += not ok_s
        fails["hood"] += not ok_h
        fails["overlap"] += not ok_o
        last = (Yp, size, hood, overlap)
        if ok_s and ok_h and ok_o:
            return NetResult(True, tuple(Yp), a + 1, fails, size, size_lim, hood, hood_lim,
                             overlap, overlap_lim)
    Yp, size, hood, overlap = last if last else ([], 0, 0, 0)
    return NetResult(False, tuple(Yp), max_retries, fails, size, size_lim, hood, hood_lim,
                     overlap, overlap_lim)


# -- net-family bookkeeping ---------------------------------------------

def _log_binom(a: float, b: float) -> float:
    if b < 0 or a < b:
        return -math.inf if b > a else 0.0
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


@dataclass(frozen=True)
class NetFamilyBound:
    eps_m: float               # eps * m (may underflow to 0 at paper scale)
    log_eps_m: float
    log_binomial: float        # log of the binomial product
    log_middle: float          # log of the closed-form middle bound
    log_size: float            # log (15 eps)^{-eps m} = -eps m log(15 eps)
    rate_middle: float         # log_middle / (eps m)
    rate_size: float           # log_size / (eps m)
    middle_le_size: bool
    binomial_le_size: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def net_family_size(params: MartingaleParams, m: float, t: float | None = None,
                    N: float | None = None) -> NetFamilyBound:
    """Log-space bounds on the number of nets.

    ``t`` (net size) defaults to ``33 C delta m / K`` and ``N`` (neighborhood
    size) to ``(64 + C) m / sqrt(K)``. The middle bound and the target are
    both ``eps m`` times a rate, so their comparison is made on the rates.
    """
    if m <= 0:
        raise PreconditionError("m must be positive")
    K, C, beta = params.K, params.C, params.beta
    log_eps_m = params.log_eps + math.log(m)
    eps_m = math.exp(log_eps_m)
    if t is None:
        t = 33.0 * C * params.delta * m / K
    if N is None:
        N = (64.0 + C) * m / math.sqrt(K)
    log_bin = _log_binom(2.0 * m / beta, t) + _log_binom(N, eps_m)
    rate_mid = (33.0 * C / K ** 2) * (math.log(2.0 * math.e * K / (33.0 * C * beta))
                                      - params.log_delta) \
        + 1.0 + math.log(64.0 + C) - params.log_eps - 0.5 * math.log(K)
    rate_size = -(math.log(15.0) + params.log_eps)
    return NetFamilyBound(eps_m, log_eps_m, log_bin, eps_m * rate_mid, eps_m * rate_size,
                          rate_mid, rate_size, rate_mid <= rate_size,
                          log_bin <= eps_m * rate_size + 1e-12)
