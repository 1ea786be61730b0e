"""Pure-numpy implementations of the hot kernels (same contract as _core)."""

from __future__ import annotations

import numpy as np

NAME = "fallback"


def dp_moments(w, n_max: int, s_max: int, bridge: bool = False, e_base=None):
    """Moment table M[s, N] plus scaled coefficients e[N, s]; see _core."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.shape[0] < n_max:
        raise ValueError("weight table shorter than n_max")
    S = s_max + 1
    fac = 0.5 if bridge else 0.25

    W = np.empty((n_max, S))
    W[:, 0] = 1.0
    for s3 in range(1, S):
        W[:, s3] = W[:, s3 - 1] * w[:n_max] / s3

    E = np.zeros((n_max + 1, S))
    E[0, 0] = 1.0
    if bridge:
        if e_base is None or e_base.shape[0] < n_max or e_base.shape[1] != S:
            raise ValueError("bridge DP needs the excursion coefficient table")
        base = e_base
    else:
        base = E

    # G[m, s2, s3] = base[m, s2] * W[m, s3]
    G = np.zeros((n_max, S, S))
    G[0] = np.outer(base[0], W[0])

    # index sets with s1 + s2 + s3 = s
    triples = [[(s1, s2, s - s1 - s2) for s1 in range(s + 1) for s2 in range(s + 1 - s1)]
               for s in range(S)]

    for N in range(1, n_max + 1):
        R = E[N - 1 :: -1, :]  # R[m, s1] = e[N-1-m, s1]
        T = np.tensordot(R[:N], G[:N], axes=(0, 0))  # T[s1, s2, s3]
        for s in range(S):
            E[N, s] = fac * sum(T[i, j, k] for i, j, k in triples[s])
        if N < n_max:
            G[N] = np.outer(base[N], W[N])

    M = np.zeros((S, n_max + 1))
    M[0] = 1.0
    fact = 1.0
    for s in range(1, S):
        fact *= s
        M[s, 1:] = fact * E[1:, s] / E[1:, 0]
    return M, E


def sample_paths(ensemble: str, size: int, count: int, seed: int):
    """Uniform excursions/bridges as int8 steps, vectorized across paths."""
    rng = np.random.Generator(np.random.PCG64(seed))
    excursion = ensemble == "excursion"
    total = 2 * size + 1 if excursion else 2 * size
    out = np.empty((count, 2 * size), dtype=np.int8)
    chunk = max(1, min(count, (1 << 22) // max(total, 1)))
    row = np.concatenate(
        [np.ones(size + 1 if excursion else size, dtype=np.int8), -np.ones(size, dtype=np.int8)]
    )
    done = 0
    while done < count:
        n = min(chunk, count - done)
        # random permutations via argsort of iid uniforms
        keys = rng.random((n, total))
        order = np.argsort(keys, axis=1)
        steps = row[order]
        if excursion:
            prefix = np.cumsum(steps, axis=1)
            # last index attaining the minimum
            rev_argmin = np.argmin(prefix[:, ::-1], axis=1)
            last_min = total - 1 - rev_argmin
            rot = (last_min + 1) % total
            idx = (rot[:, None] + 1 + np.arange(2 * size)[None, :]) % total
            out[done : done + n] = np.take_along_axis(steps, idx, axis=1)
        else:
            out[done : done + n] = steps
        done += n
    return out


def batch_statistic(steps, w):
    """Vectorized arcwise stack scan over a batch of paths."""
    steps = np.asarray(steps, dtype=np.int8)
    w = np.asarray(w, dtype=np.float64)
    count, length = steps.shape
    half = length // 2
    acc = np.zeros(count)
    stack = np.zeros((count, half), dtype=np.int32)
    depth = np.zeros(count, dtype=np.int32)
    h = np.zeros(count, dtype=np.int32)
    sgn = np.ones(count, dtype=np.int8)
    rows = np.arange(count)
    for t in range(length):
        st = steps[:, t]
        at_zero = h == 0
        sgn = np.where(at_zero, st, sgn)
        push = st == sgn
        pr = rows[push]
        stack[pr, depth[pr]] = t
        depth[pr] += 1
        qr = rows[~push]
        depth[qr] -= 1
        opened = stack[qr, depth[qr]]
        m = (t - opened - 1) >> 1
        acc[qr] += w[m]
        h = h + st
    return acc
