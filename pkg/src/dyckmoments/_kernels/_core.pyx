# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: float64 moment DP, path sampling, batch slice statistic."""

import numpy as np

cimport cython
from libc.stdint cimport int8_t, int32_t, uint64_t

NAME = "compiled"


# ---------------------------------------------------------------------------
# finite-size moment DP


def dp_moments(double[::1] w, int n_max, int s_max, bint bridge=False,
               double[:, ::1] e_base=None):
    """Moment table M[s, N] of the additive slice statistic, plus the scaled
    coefficient table e[N, s] = 4^-N (1/s!) sum_paths A^s (factor 2 for bridges).

    ``w`` holds the per-slice weights w[m] = omega(m) - eps for m < n_max.
    For bridges, pass the excursion coefficient table as ``e_base``.
    """
    cdef int S = s_max + 1
    cdef int N, m, s1, s2, s3, s, t, nblock
    cdef double fac = 0.5 if bridge else 0.25
    cdef double g, a0, a1, a2, a3
    if w.shape[0] < n_max:
        raise ValueError("weight table shorter than n_max")
    if bridge and (e_base is None or e_base.shape[0] < n_max or e_base.shape[1] != S):
        raise ValueError("bridge DP needs the excursion coefficient table")

    # transposed working tables: row-contiguous over N/m for unit-stride dots
    Et_np = np.zeros((S, n_max + 1), dtype=np.float64)
    cdef double[:, ::1] Et = Et_np
    Et[0, 0] = 1.0
    Gt_np = np.zeros((S * S, n_max), dtype=np.float64)
    cdef double[:, ::1] Gt = Gt_np
    Rev_np = np.zeros((S, n_max), dtype=np.float64)  # Et rows reversed up to N
    cdef double[:, ::1] Rev = Rev_np
    cdef double[::1] acc = np.zeros(S, dtype=np.float64)
    cdef double[::1] wlocal = np.ascontiguousarray(w[:n_max])

    cdef double base_val, wp
    for s2 in range(S):
        base_val = e_base[0, s2] if bridge else Et[s2, 0]
        wp = 1.0
        for s3 in range(S - s2):
            Gt[s2 * S + s3, 0] = base_val * wp
            wp = wp * wlocal[0] / (s3 + 1)

    with nogil:
        for N in range(1, n_max + 1):
            # Rev[s1, m] = Et[s1, N-1-m] for m < N (shift previous row by one)
            for s1 in range(S):
                for m in range(N - 1, 0, -1):
                    Rev[s1, m] = Rev[s1, m - 1]
                Rev[s1, 0] = Et[s1, N - 1]
            for s in range(S):
                acc[s] = 0.0
            for s2 in range(S):
                for s3 in range(S - s2):
                    t = s2 * S + s3
                    for s1 in range(S - s2 - s3):
                        s = s1 + s2 + s3
                        # unrolled unit-stride dot over m
                        a0 = 0.0
                        a1 = 0.0
                        a2 = 0.0
                        a3 = 0.0
                        nblock = N - (N & 3)
                        for m in range(0, nblock, 4):
                            a0 += Rev[s1, m] * Gt[t, m]
                            a1 += Rev[s1, m + 1] * Gt[t, m + 1]
                            a2 += Rev[s1, m + 2] * Gt[t, m + 2]
                            a3 += Rev[s1, m + 3] * Gt[t, m + 3]
                        for m in range(nblock, N):
                            a0 += Rev[s1, m] * Gt[t, m]
                        acc[s] += (a0 + a1) + (a2 + a3)
            for s in range(S):
                Et[s, N] = fac * acc[s]
            if N < n_max:
                for s2 in range(S):
                    base_val = e_base[N, s2] if bridge else Et[s2, N]
                    wp = 1.0
                    for s3 in range(S - s2):
                        Gt[s2 * S + s3, N] = base_val * wp
                        wp = wp * wlocal[N] / (s3 + 1)

    M_np = np.zeros((S, n_max + 1), dtype=np.float64)
    cdef double[:, ::1] M = M_np
    cdef double fact = 1.0
    for N in range(n_max + 1):
        M[0, N] = 1.0
    for s in range(1, S):
        fact *= s
        for N in range(1, n_max + 1):
            M[s, N] = fact * Et[s, N] / Et[0, N]
    E_np = np.ascontiguousarray(Et_np.T)
    return M_np, E_np


# ---------------------------------------------------------------------------
# RNG: splitmix64-seeded xoshiro256**


cdef inline uint64_t _splitmix64(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef struct Xoshiro:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline void _seed_rng(Xoshiro* rng, uint64_t seed) noexcept nogil:
    cdef uint64_t sm = seed
    rng.s0 = _splitmix64(&sm)
    rng.s1 = _splitmix64(&sm)
    rng.s2 = _splitmix64(&sm)
    rng.s3 = _splitmix64(&sm)


cdef inline uint64_t _next(Xoshiro* rng) noexcept nogil:
    cdef uint64_t result = _rotl(rng.s1 * 5, 7) * 9
    cdef uint64_t t = rng.s1 << 17
    rng.s2 ^= rng.s0
    rng.s3 ^= rng.s1
    rng.s1 ^= rng.s2
    rng.s0 ^= rng.s3
    rng.s2 ^= t
    rng.s3 = _rotl(rng.s3, 45)
    return result


cdef inline uint64_t _bounded(Xoshiro* rng, uint64_t n) noexcept nogil:
    return _next(rng) % n


# ---------------------------------------------------------------------------
# sampling


def sample_paths(str ensemble, int size, int count, uint64_t seed):
    """Uniform excursions (cycle lemma) or bridges (shuffle): int8 steps array."""
    cdef bint excursion = ensemble == "excursion"
    cdef int total = 2 * size + 1 if excursion else 2 * size
    out_np = np.empty((count, 2 * size), dtype=np.int8)
    cdef int8_t[:, ::1] out = out_np
    buf_np = np.empty(total, dtype=np.int8)
    cdef int8_t[::1] buf = buf_np
    cdef Xoshiro rng
    _seed_rng(&rng, seed)
    cdef int i, j, t, h, minh, rot
    cdef int8_t tmp
    cdef int ups
    with nogil:
        for i in range(count):
            ups = size + 1 if excursion else size
            for t in range(total):
                buf[t] = 1 if t < ups else -1
            # Fisher-Yates
            for t in range(total - 1, 0, -1):
                j = <int>_bounded(&rng, <uint64_t>(t + 1))
                tmp = buf[t]
                buf[t] = buf[j]
                buf[j] = tmp
            if excursion:
                # rotate to just after the last prefix minimum, drop leading up
                h = 0
                minh = 1
                rot = 0
                for t in range(total):
                    h += buf[t]
                    if h <= minh:
                        minh = h
                        rot = t + 1
                for t in range(2 * size):
                    out[i, t] = buf[(rot + 1 + t) % total]
            else:
                for t in range(total):
                    out[i, t] = buf[t]
    return out_np


def batch_statistic(int8_t[:, ::1] steps, double[::1] w):
    """sum over matched slice pairs of w[m], m the slice semi-length.

    Bridges are handled arcwise on the reflected arcs (sign flips whenever
    the walk leaves height zero).
    """
    cdef int count = steps.shape[0]
    cdef int length = steps.shape[1]
    cdef int half = length // 2
    out_np = np.zeros(count, dtype=np.float64)
    cdef double[::1] out = out_np
    stack_np = np.zeros(half, dtype=np.int32)
    cdef int32_t[::1] stack = stack_np
    cdef int i, t, h, sp, sgn, m
    cdef int8_t st
    cdef double acc
    with nogil:
        for i in range(count):
            acc = 0.0
            h = 0
            sp = 0
            sgn = 1
            for t in range(length):
                st = steps[i, t]
                if h == 0:
                    sgn = st
                if st == sgn:
                    stack[sp] = t
                    sp += 1
                else:
                    sp -= 1
                    m = (t - stack[sp] - 1) >> 1
                    acc += w[m]
                h += st
            out[i] = acc
    return out_np
