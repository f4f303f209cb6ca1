"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature and bitwise
identical output.  The compiled path is used unless the environment
variable ``ASV5EVAL_NUMBA`` is set to ``0`` (or numba is not importable).
The flag changes speed only, never results.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised indirectly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("ASV5EVAL_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# pool adjacent violators over integer-weighted points


def pav_blocks_numpy(pos: np.ndarray, weight: np.ndarray):
    """Pool adjacent violators on points with mean ``pos[i] / weight[i]``.

    Inputs are int64 counts (positives per point, trials per point), so the
    violation test ``pos_a / w_a > pos_b / w_b`` is done exactly by
    cross-multiplication.  Returns ``(block_pos, block_weight, block_end)``
    with ``block_end`` the exclusive end index of each block.
    """
    n = pos.shape[0]
    bp = np.empty(n, dtype=np.int64)
    bw = np.empty(n, dtype=np.int64)
    be = np.empty(n, dtype=np.int64)
    nb = 0
    for i in range(n):
        bp[nb] = pos[i]
        bw[nb] = weight[i]
        be[nb] = i + 1
        nb += 1
        while nb > 1 and bp[nb - 2] * bw[nb - 1] >= bp[nb - 1] * bw[nb - 2]:
            bp[nb - 2] += bp[nb - 1]
            bw[nb - 2] += bw[nb - 1]
            be[nb - 2] = be[nb - 1]
            nb -= 1
    return bp[:nb].copy(), bw[:nb].copy(), be[:nb].copy()


# ---------------------------------------------------------------------------
# tail sums of weights bucketed by an integer rank: S[k] = sum_{idx >= k} w


def tail_sums_numpy(idx: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    hist = np.bincount(idx, weights=w, minlength=k)
    out = np.zeros(k + 1)
    out[:k] = np.cumsum(hist[::-1])[::-1]
    return out


def _tail_sums_loop(idx, w, k):
    hist = np.zeros(k)
    for i in range(idx.shape[0]):
        hist[idx[i]] += w[i]
    out = np.zeros(k + 1)
    acc = 0.0
    for j in range(k - 1, -1, -1):
        acc += hist[j]
        out[j] = acc
    return out


# ---------------------------------------------------------------------------
# min over operating points of  beta * p_miss + p_fa,  for many betas


def min_cost_grid_numpy(betas: np.ndarray, p_miss: np.ndarray, p_fa: np.ndarray) -> np.ndarray:
    out = np.empty(betas.shape[0])
    chunk = max(1, 2_000_000 // max(1, p_miss.shape[0]))
    for lo in range(0, betas.shape[0], chunk):
        b = betas[lo : lo + chunk, None]
        out[lo : lo + chunk] = np.min(b * p_miss[None, :] + p_fa[None, :], axis=1)
    return out


def _min_cost_grid_loop(betas, p_miss, p_fa):
    out = np.empty(betas.shape[0])
    for g in range(betas.shape[0]):
        b = betas[g]
        best = np.inf
        for i in range(p_miss.shape[0]):
            c = b * p_miss[i] + p_fa[i]
            if c < best:
                best = c
        out[g] = best
    return out


if HAVE_NUMBA:
    _pav_blocks_jit = numba.njit(cache=True)(pav_blocks_numpy)
    _tail_sums_jit = numba.njit(cache=True)(_tail_sums_loop)
    _min_cost_grid_jit = numba.njit(cache=True)(_min_cost_grid_loop)
else:  # pragma: no cover
    _pav_blocks_jit = _tail_sums_jit = _min_cost_grid_jit = None


def pav_blocks(pos, weight):
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    weight = np.ascontiguousarray(weight, dtype=np.int64)
    if numba_enabled():
        return _pav_blocks_jit(pos, weight)
    return pav_blocks_numpy(pos, weight)


def tail_sums(idx, w, k: int) -> np.ndarray:
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if numba_enabled():
        return _tail_sums_jit(idx, w, int(k))
    return tail_sums_numpy(idx, w, int(k))


def min_cost_grid(betas, p_miss, p_fa) -> np.ndarray:
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    p_miss = np.ascontiguousarray(p_miss, dtype=np.float64)
    p_fa = np.ascontiguousarray(p_fa, dtype=np.float64)
    if numba_enabled():
        return _min_cost_grid_jit(betas, p_miss, p_fa)
    return min_cost_grid_numpy(betas, p_miss, p_fa)
