"""Numba-compiled hot loops for the fuzzy scanner.

Pure-python fallbacks are provided so the package works without numba;
`HAVE_NUMBA` reports which path is active.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True, nogil=True)
def lev_banded(a, b, cutoff):
    """Banded token Levenshtein; returns -1 when distance > cutoff."""
    n = a.shape[0]
    m = b.shape[0]
    if abs(n - m) > cutoff:
        return -1
    if n == 0 or m == 0:
        d = max(n, m)
        return d if d <= cutoff else -1
    big = cutoff + 1
    prev = np.empty(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for j in range(m + 1):
        prev[j] = j if j <= cutoff else big
    for i in range(1, n + 1):
        lo = i - cutoff
        if lo < 1:
            lo = 1
        hi = i + cutoff
        if hi > m:
            hi = m
        for j in range(m + 1):
            cur[j] = big
        if lo == 1:
            cur[0] = i if i <= cutoff else big
        row_min = cur[0] if lo == 1 else big
        for j in range(lo, hi + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            v = prev[j] + 1
            w = cur[j - 1] + 1
            if w < v:
                v = w
            w = prev[j - 1] + cost
            if w < v:
                v = w
            if v > big:
                v = big
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min > cutoff:
            return -1
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m] if prev[m] <= cutoff else -1


@njit(cache=True, nogil=True)
def scan_segment(
    doc,
    seg_start,
    seg_end,
    window_length,
    targets,
    target_counts,
    thresholds,
    max_distance,
):
    """Sliding-window scan of doc positions [seg_start, seg_end).

    For each window start p, maintains the multiset-overlap counter with
    every target; runs banded Levenshtein only when the counter reaches
    the target's threshold. Returns parallel (pos, target, dist) arrays.
    """
    T = targets.shape[0]
    W = window_length
    n_pos = seg_end - seg_start
    out_pos = np.empty(0, dtype=np.int64)
    out_tgt = np.empty(0, dtype=np.int64)
    out_dist = np.empty(0, dtype=np.int64)
    if n_pos <= 0 or doc.shape[0] < seg_start + W:
        return out_pos, out_tgt, out_dist
    cap = 16
    out_pos = np.empty(cap, dtype=np.int64)
    out_tgt = np.empty(cap, dtype=np.int64)
    out_dist = np.empty(cap, dtype=np.int64)
    count = 0

    V = target_counts.shape[1]
    window_count = np.zeros(V, dtype=np.int32)
    shared = np.zeros(T, dtype=np.int64)
    for idx in range(seg_start, seg_start + W):
        tok = doc[idx]
        if tok < V:
            window_count[tok] += 1
            for t in range(T):
                if window_count[tok] <= target_counts[t, tok]:
                    shared[t] += 1
    p = seg_start
    while True:
        if doc.shape[0] - p >= W:
            for t in range(T):
                if shared[t] >= thresholds[t]:
                    d = lev_banded(doc[p : p + W], targets[t], max_distance)
                    if d >= 0:
                        if count == cap:
                            cap *= 2
                            np_new = np.empty(cap, dtype=np.int64)
                            nt_new = np.empty(cap, dtype=np.int64)
                            nd_new = np.empty(cap, dtype=np.int64)
                            np_new[:count] = out_pos[:count]
                            nt_new[:count] = out_tgt[:count]
                            nd_new[:count] = out_dist[:count]
                            out_pos = np_new
                            out_tgt = nt_new
                            out_dist = nd_new
                        out_pos[count] = p
                        out_tgt[count] = t
                        out_dist[count] = d
                        count += 1
        p += 1
        if p >= seg_end or doc.shape[0] - p < W:
            break
        # slide: remove leaving token, add entering token
        tok = doc[p - 1]
        if tok < V:
            for t in range(T):
                if window_count[tok] <= target_counts[t, tok]:
                    shared[t] -= 1
            window_count[tok] -= 1
        tok = doc[p + W - 1]
        if tok < V:
            window_count[tok] += 1
            for t in range(T):
                if window_count[tok] <= target_counts[t, tok]:
                    shared[t] += 1
    return out_pos[:count], out_tgt[:count], out_dist[:count]


@njit(cache=True)
def lev_recursive(a, b, i, j):
    """Memo-free recursive Levenshtein over all edit scripts (oracle)."""
    if i == 0:
        return j
    if j == 0:
        return i
    cost = 0 if a[i - 1] == b[j - 1] else 1
    d = lev_recursive(a, b, i - 1, j) + 1
    w = lev_recursive(a, b, i, j - 1) + 1
    if w < d:
        d = w
    w = lev_recursive(a, b, i - 1, j - 1) + cost
    if w < d:
        d = w
    return d


@njit(cache=True)
def lcs_recursive(a, b, i, j):
    """Memo-free recursive longest-common-subsequence length (oracle)."""
    if i == 0 or j == 0:
        return 0
    if a[i - 1] == b[j - 1]:
        return lcs_recursive(a, b, i - 1, j - 1) + 1
    d = lcs_recursive(a, b, i - 1, j)
    w = lcs_recursive(a, b, i, j - 1)
    return d if d >= w else w


@njit(cache=True)
def osa_recursive(a, b, i, j):
    """Memo-free recursive optimal-string-alignment distance (oracle)."""
    if i == 0:
        return j
    if j == 0:
        return i
    cost = 0 if a[i - 1] == b[j - 1] else 1
    d = osa_recursive(a, b, i - 1, j) + 1
    w = osa_recursive(a, b, i, j - 1) + 1
    if w < d:
        d = w
    w = osa_recursive(a, b, i - 1, j - 1) + cost
    if w < d:
        d = w
    if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
        w = osa_recursive(a, b, i - 2, j - 2) + 1
        if w < d:
            d = w
    return d
