# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback.py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef uint64_t REP = 0xD1B54A32D192ED03ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t _key(uint64_t seed, uint64_t rep) nogil:
    return _mix(_mix(seed + GOLDEN) ^ ((rep + 1) * REP))


cdef inline double _uniform(uint64_t key, uint64_t step) nogil:
    return <double>(_mix(key + (step + 1) * GOLDEN) >> 11) * INV53


cdef inline int64_t _choose(const int64_t[:] indptr, const double[:] cum,
                            int64_t x, double u) nogil:
    cdef int64_t lo = indptr[x]
    cdef int64_t hi = indptr[x + 1] - 1
    cdef int64_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline int64_t _start(const double[:] start_cum, double u) nogil:
    # first index with start_cum > u
    cdef int64_t lo = 0
    cdef int64_t hi = start_cum.shape[0]
    cdef int64_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if start_cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def stream_keys(seed, reps):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    r = np.asarray(reps, dtype=np.uint64)
    cdef uint64_t[:] rv = r
    out = np.empty(r.shape[0], dtype=np.uint64)
    cdef uint64_t[:] ov = out
    cdef Py_ssize_t i
    for i in range(r.shape[0]):
        ov[i] = _key(s, rv[i])
    return out


def uniforms(keys, step):
    k = np.asarray(keys, dtype=np.uint64)
    cdef uint64_t[:] kv = k
    cdef uint64_t st = <uint64_t>step
    out = np.empty(k.shape[0], dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t i
    for i in range(k.shape[0]):
        ov[i] = _uniform(kv[i], st)
    return out


def simulate_paths(const int64_t[:] indptr, const int64_t[:] indices,
                   const double[:] cum, const double[:] start_cum,
                   seed, int64_t rep0, int64_t nreps, int64_t steps):
    out = np.empty((nreps, steps + 1), dtype=np.int64)
    cdef int64_t[:, :] ov = out
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t key
    cdef int64_t r, t, x
    with nogil:
        for r in range(nreps):
            key = _key(s, <uint64_t>(rep0 + r))
            x = _start(start_cum, _uniform(key, 0))
            ov[r, 0] = x
            for t in range(1, steps + 1):
                x = indices[_choose(indptr, cum, x, _uniform(key, <uint64_t>t))]
                ov[r, t] = x
    return out


def cover_flags(const int64_t[:] indptr, const int64_t[:] indices,
                const double[:] cum, const double[:] start_cum,
                seed, int64_t rep0, int64_t nreps, int64_t steps,
                const int64_t[:] bit_of, int64_t full_mask, bint include_start):
    out = np.zeros(nreps, dtype=np.uint8)
    cdef unsigned char[:] ov = out
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t key
    cdef int64_t r, t, x, mask
    with nogil:
        for r in range(nreps):
            key = _key(s, <uint64_t>(rep0 + r))
            x = _start(start_cum, _uniform(key, 0))
            mask = 0
            if include_start and bit_of[x] >= 0:
                mask = (<int64_t>1) << bit_of[x]
            for t in range(1, steps + 1):
                x = indices[_choose(indptr, cum, x, _uniform(key, <uint64_t>t))]
                if bit_of[x] >= 0:
                    mask |= (<int64_t>1) << bit_of[x]
            ov[r] = 1 if mask == full_mask else 0
    return out


def distinct_counts(const int64_t[:] indptr, const int64_t[:] indices,
                    const double[:] cum, const double[:] start_cum,
                    seed, int64_t rep0, int64_t nreps, int64_t steps,
                    const unsigned char[:] in_a):
    cdef int64_t n = indptr.shape[0] - 1
    out = np.zeros(nreps, dtype=np.int64)
    cdef int64_t[:] ov = out
    stamp_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[:] stamp = stamp_arr
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t key
    cdef int64_t r, t, x, c
    with nogil:
        for r in range(nreps):
            key = _key(s, <uint64_t>(rep0 + r))
            x = _start(start_cum, _uniform(key, 0))
            c = 0
            for t in range(1, steps + 1):
                x = indices[_choose(indptr, cum, x, _uniform(key, <uint64_t>t))]
                if in_a[x] and stamp[x] != r:
                    stamp[x] = r
                    c += 1
            ov[r] = c
    return out


def cover_dp(const int64_t[:] indptr, const int64_t[:] indices,
             const double[:] probs, const double[:] init,
             const int64_t[:] bit_of, int nbits, int64_t steps, bint include_start):
    cdef int64_t n = indptr.shape[0] - 1
    cdef int64_t size = (<int64_t>1) << nbits
    a = np.zeros((n, size), dtype=np.float64)
    b = np.zeros((n, size), dtype=np.float64)
    cdef double[:, :] cur = a
    cdef double[:, :] nxt = b
    cdef double[:, :] tmp
    cdef int64_t x, y, k, m, add, t
    cdef double p, mass
    for x in range(n):
        if init[x] > 0:
            m = 0
            if include_start and bit_of[x] >= 0:
                m = (<int64_t>1) << bit_of[x]
            cur[x, m] += init[x]
    with nogil:
        for t in range(steps):
            for y in range(n):
                for m in range(size):
                    nxt[y, m] = 0.0
            for x in range(n):
                for k in range(indptr[x], indptr[x + 1]):
                    y = indices[k]
                    p = probs[k]
                    add = 0
                    if bit_of[y] >= 0:
                        add = (<int64_t>1) << bit_of[y]
                    for m in range(size):
                        mass = cur[x, m]
                        if mass != 0.0:
                            nxt[y, m | add] += mass * p
            tmp = cur
            cur = nxt
            nxt = tmp
    mass = 0.0
    for x in range(n):
        mass += cur[x, size - 1]
    return mass
