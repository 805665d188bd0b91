# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled decision kernels.

Twin of `_decisions_py`: identical SplitMix64 arithmetic, identical draw
order, identical outputs.  Keep both files in sync.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

BACKEND = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t next_u64(uint64_t *state) nogil:
    state[0] = state[0] + GAMMA
    return mix64(state[0])


cdef inline double uniform(uint64_t *state) nogil:
    return <double>(next_u64(state) >> 11) * INV_2_53


cdef inline uint64_t randrange(uint64_t *state, uint64_t n) nogil:
    # Rejects the top (2^64 mod n) values, matching Rng.randrange.
    cdef uint64_t r = ((<uint64_t>0xFFFFFFFFFFFFFFFFULL % n) + 1) % n
    cdef uint64_t limit = <uint64_t>0 - r
    cdef uint64_t x = next_u64(state)
    if r == 0:
        return x % n
    while x >= limit:
        x = next_u64(state)
    return x % n


def draw_replacements(state, int n, double p_r, int n_langs):
    """See `_decisions_py.draw_replacements`."""
    cdef uint64_t s = <uint64_t>state
    cdef list decisions = []
    cdef int i
    for i in range(n):
        if uniform(&s) < p_r:
            decisions.append(<long>randrange(&s, <uint64_t>n_langs))
        else:
            decisions.append(-1)
    return decisions, <object>s


def draw_span_mask(state, int n, int target, tuple cdf):
    """See `_decisions_py.draw_span_mask`."""
    cdef uint64_t s = <uint64_t>state
    cdef int ncdf = len(cdf)
    cdef double *c = <double *>malloc(ncdf * sizeof(double))
    cdef int i
    for i in range(ncdf):
        c[i] = cdf[i]
    cdef bytearray flags = bytearray(n)
    cdef unsigned char[:] f = flags
    cdef int masked = 0
    cdef int length, k, idx, seen, pos, covered
    cdef double u
    try:
        while masked < target and masked < n:
            # Poisson draw, resampling zero lengths
            while True:
                u = uniform(&s)
                length = 0
                while length < ncdf - 1 and u >= c[length]:
                    length += 1
                if length >= 1:
                    break
            if length > target - masked:
                length = target - masked
            k = <int>randrange(&s, <uint64_t>(n - masked))
            seen = 0
            idx = 0
            for idx in range(n):
                if f[idx] == 0:
                    if seen == k:
                        break
                    seen += 1
            f[idx] = 2
            masked += 1
            pos = idx + 1
            covered = 1
            while covered < length and pos < n and f[pos] == 0:
                f[pos] = 1
                masked += 1
                covered += 1
                pos += 1
    finally:
        free(c)
    return flags, masked, <object>s
