"""Token-sequence distance metrics.

All functions operate on sequences of token IDs (lists, tuples or numpy
arrays). Distances are in token units unless stated otherwise; the
set/multiset overlap metrics are normalized to [0, 1].
"""

from __future__ import annotations

from collections import Counter
from typing import Optional, Sequence

TokenSeq = Sequence[int]


def levenshtein(a: TokenSeq, b: TokenSeq, cutoff: Optional[int] = None) -> Optional[int]:
    """Token-level edit distance (insert, delete, substitute).

    With `cutoff`, the computation is banded and returns None as soon as
    the true distance provably exceeds the cutoff; otherwise the exact
    distance is returned.
    """
    a, b = list(a), list(b)
    if cutoff is not None:
        return _levenshtein_banded(a, b, cutoff)
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[m]


def _levenshtein_banded(a: list, b: list, cutoff: int) -> Optional[int]:
    n, m = len(a), len(b)
    if abs(n - m) > cutoff:
        return None
    if n == 0 or m == 0:
        d = max(n, m)
        return d if d <= cutoff else None
    big = cutoff + 1
    prev = [j if j <= cutoff else big for j in range(m + 1)]
    for i in range(1, n + 1):
        lo = max(1, i - cutoff)
        hi = min(m, i + cutoff)
        cur = [big] * (m + 1)
        if lo == 1:
            cur[0] = i if i <= cutoff else big
        row_min = cur[0] if lo == 1 else big
        for j in range(lo, hi + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            v = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if v > big:
                v = big
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min > cutoff:
            return None
        prev = cur
    return prev[m] if prev[m] <= cutoff else None


def damerau_levenshtein(a: TokenSeq, b: TokenSeq) -> int:
    """Edit distance with adjacent transposition as one operation.

    Restricted (optimal string alignment) variant: a substring may not be
    edited twice.
    """
    a, b = list(a), list(b)
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev2: Optional[list] = None
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            v = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (
                i > 1
                and j > 1
                and ai == b[j - 2]
                and a[i - 2] == b[j - 1]
                and prev2 is not None
            ):
                v = min(v, prev2[j - 2] + 1)
            cur[j] = v
        prev2, prev = prev, cur
    return prev[m]


def lcs_distance(a: TokenSeq, b: TokenSeq) -> int:
    """max(|a|, |b|) minus the longest-common-subsequence length."""
    a, b = list(a), list(b)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return max(n, m)
    prev = [0] * (m + 1)
    for i in range(1, n + 1):
        cur = [0] * (m + 1)
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return max(n, m) - prev[m]


def hamming(a: TokenSeq, b: TokenSeq) -> int:
    """Count of positions where corresponding tokens differ."""
    if len(a) != len(b):
        raise ValueError(f"hamming requires equal lengths ({len(a)} != {len(b)})")
    return sum(1 for x, y in zip(a, b) if x != y)


def multiset_overlap_distance(a: TokenSeq, b: TokenSeq) -> float:
    """1 - |multiset intersection| / max(|a|, |b|)."""
    if len(a) == 0 and len(b) == 0:
        raise ValueError("both sequences empty")
    ca, cb = Counter(map(int, a)), Counter(map(int, b))
    inter = sum(min(ca[t], cb[t]) for t in ca)
    return 1.0 - inter / max(len(a), len(b))


def jaccard_token(a: TokenSeq, b: TokenSeq) -> float:
    """1 - |set(a) & set(b)| / |set(a) | set(b)|."""
    sa, sb = set(map(int, a)), set(map(int, b))
    union = sa | sb
    if not union:
        raise ValueError("both sequences empty")
    return 1.0 - len(sa & sb) / len(union)


def _ngram_set(seq: TokenSeq, n: int) -> set:
    seq = tuple(map(int, seq))
    return {seq[i : i + n] for i in range(len(seq) - n + 1)}


def jaccard_ngram(a: TokenSeq, b: TokenSeq, n: int) -> float:
    """1 - Jaccard over the sets of all contiguous n-grams."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(a) < n or len(b) < n:
        raise ValueError(f"sequences must have length >= n={n}")
    sa, sb = _ngram_set(a, n), _ngram_set(b, n)
    return 1.0 - len(sa & sb) / len(sa | sb)


def kendall_tau(permutation: Sequence[int]) -> float:
    """Fraction of position pairs whose relative order the permutation inverts.

    `permutation[u]` is the new position of original position u. 0 means
    identity, 1 means exact reversal. Defined over positions, so it is
    independent of token values.
    """
    perm = list(permutation)
    L = len(perm)
    if L < 2:
        raise ValueError("permutation must have length >= 2")
    if sorted(perm) != list(range(L)):
        raise ValueError("mapping is not a bijection on 0..L-1")
    discordant = _count_inversions(perm)
    return discordant / (L * (L - 1) / 2)


def _count_inversions(seq: list) -> int:
    # merge-sort inversion count, O(L log L)
    def rec(lst):
        if len(lst) <= 1:
            return lst, 0
        mid = len(lst) // 2
        left, invl = rec(lst[:mid])
        right, invr = rec(lst[mid:])
        merged = []
        inv = invl + invr
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                inv += len(left) - i
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return rec(seq)[1]


def ngram_overlap_count(a: TokenSeq, b: TokenSeq, n: int) -> int:
    """Number of position-n-grams of `a` that occur anywhere in `b`.

    Each position in `a` contributes at most once; the location of the
    n-gram in `b` is irrelevant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(a) < n:
        raise ValueError(f"|a| must be >= n={n}")
    bset = _ngram_set(b, n) if len(b) >= n else set()
    a = tuple(map(int, a))
    return sum(1 for i in range(len(a) - n + 1) if a[i : i + n] in bset)
