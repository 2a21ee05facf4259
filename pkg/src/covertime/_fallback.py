"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature.
Walk sampling is bitwise identical between the two: both draw uniforms from
the same counter hash and pick the first cumulative entry strictly above the
uniform.
"""
import numpy as np

MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_REP = np.uint64(0xD1B54A32D192ED03)
_INV53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed, reps):
    """Per-replication keys derived from the master seed."""
    seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    reps = np.asarray(reps, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix(np.array([seed + _GOLDEN], dtype=np.uint64))[0]
        return _mix(base ^ ((reps + np.uint64(1)) * _REP))


def uniforms(keys, step):
    """Uniform doubles in [0, 1) for counter ``step`` of each stream."""
    with np.errstate(over="ignore"):
        z = _mix(keys + np.uint64(int(step) + 1) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _choose(indptr, cum, x, u):
    """Index into the CSR arrays of the first entry in row x with cum > u."""
    lo = indptr[x].copy()
    hi = indptr[x + 1] - 1
    while True:
        active = lo < hi
        if not active.any():
            return lo
        mid = (lo + hi) // 2
        go_right = active & (cum[mid] <= u)
        lo = np.where(go_right, mid + 1, lo)
        hi = np.where(active & ~go_right, mid, hi)


def _start_states(start_cum, u):
    return np.searchsorted(start_cum, u, side="right").astype(np.int64)


def simulate_paths(indptr, indices, cum, start_cum, seed, rep0, nreps, steps):
    keys = stream_keys(seed, np.arange(rep0, rep0 + nreps, dtype=np.uint64))
    out = np.empty((nreps, steps + 1), dtype=np.int64)
    x = _start_states(start_cum, uniforms(keys, 0))
    out[:, 0] = x
    for t in range(1, steps + 1):
        x = indices[_choose(indptr, cum, x, uniforms(keys, t))]
        out[:, t] = x
    return out


def cover_flags(indptr, indices, cum, start_cum, seed, rep0, nreps, steps,
                bit_of, full_mask, include_start):
    """1 where the walk's visited set covers every state with a bit."""
    keys = stream_keys(seed, np.arange(rep0, rep0 + nreps, dtype=np.uint64))
    bits = np.where(bit_of >= 0, np.left_shift(np.int64(1), np.maximum(bit_of, 0)), 0)
    x = _start_states(start_cum, uniforms(keys, 0))
    mask = bits[x] if include_start else np.zeros(nreps, dtype=np.int64)
    for t in range(1, steps + 1):
        x = indices[_choose(indptr, cum, x, uniforms(keys, t))]
        mask |= bits[x]
    return (mask == full_mask).astype(np.uint8)


def distinct_counts(indptr, indices, cum, start_cum, seed, rep0, nreps, steps, in_a):
    """Number of distinct A-states among X_1..X_steps, per replication."""
    n = len(indptr) - 1
    keys = stream_keys(seed, np.arange(rep0, rep0 + nreps, dtype=np.uint64))
    seen = np.zeros((nreps, n), dtype=bool)
    counts = np.zeros(nreps, dtype=np.int64)
    rows = np.arange(nreps)
    x = _start_states(start_cum, uniforms(keys, 0))
    for t in range(1, steps + 1):
        x = indices[_choose(indptr, cum, x, uniforms(keys, t))]
        new = in_a[x].astype(bool) & ~seen[rows, x]
        counts += new
        seen[rows, x] = True
    return counts


def cover_dp(indptr, indices, probs, init, bit_of, nbits, steps, include_start):
    """Pr(every state with a bit is visited) by DP over (state, covered mask)."""
    n = len(indptr) - 1
    size = 1 << nbits
    dist = np.zeros((n, size))
    for x in range(n):
        if init[x] > 0:
            m = (1 << bit_of[x]) if (include_start and bit_of[x] >= 0) else 0
            dist[x, m] += init[x]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    # column-oriented view: for each target y, the (source, prob) pairs
    order = np.argsort(indices, kind="stable")
    src = rows[order]
    pr = probs[order]
    tgt = indices[order]
    bounds = np.searchsorted(tgt, np.arange(n + 1))
    masks = np.arange(size)
    for _ in range(steps):
        new = np.zeros_like(dist)
        for y in range(n):
            a, b = bounds[y], bounds[y + 1]
            if a == b:
                continue
            acc = pr[a:b] @ dist[src[a:b]]
            if bit_of[y] >= 0:
                bit = 1 << bit_of[y]
                hit = (masks & bit) != 0
                new[y, hit] = acc[hit] + acc[masks[hit] ^ bit]
            else:
                new[y] += acc
        dist = new
    return float(dist[:, size - 1].sum())
