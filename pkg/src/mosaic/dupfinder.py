"""Exact-duplicate counting of fixed-length windows via a suffix array.

Documents are concatenated with a sentinel token outside the vocabulary;
windows containing a sentinel are never counted, so no cross-document
window contributes. Overlapping occurrences all count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, unique_token_count

INDEX_MAGIC = b"MSSA"
INDEX_VERSION = 1


def _build_suffix_array(arr: np.ndarray) -> np.ndarray:
    """Suffix array by prefix doubling, O(n log^2 n)."""
    n = len(arr)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    rank = np.unique(arr, return_inverse=True)[1].astype(np.int64)
    sa = np.argsort(rank, kind="stable").astype(np.int64)
    k = 1
    tmp = np.empty(n, dtype=np.int64)
    while True:
        # secondary key: rank of suffix starting k positions later (-1 past end)
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        order = np.lexsort((second, rank))
        sa = order
        # recompute ranks
        prev_pairs_r = rank[order]
        prev_pairs_s = second[order]
        new_rank_sorted = np.empty(n, dtype=np.int64)
        new_rank_sorted[0] = 0
        diff = (prev_pairs_r[1:] != prev_pairs_r[:-1]) | (
            prev_pairs_s[1:] != prev_pairs_s[:-1]
        )
        new_rank_sorted[1:] = np.cumsum(diff)
        tmp[order] = new_rank_sorted
        rank = tmp.copy()
        if rank[sa[-1]] == n - 1:
            break
        k *= 2
        if k >= n:
            break
    return sa


@dataclass
class SuffixIndex:
    corpus_ref: str
    window_length: int
    sa: np.ndarray  # suffix start positions into the concatenated stream
    stream: np.ndarray  # concatenated tokens with sentinels, int64
    valid_start: np.ndarray  # bool: window of window_length fits within a doc
    window_positions: tuple  # (doc_index, offset) per stream position, -1 for sentinels

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(INDEX_MAGIC)
            fh.write(struct.pack("<HIQ", INDEX_VERSION, self.window_length, len(self.sa)))
            fh.write(self.sa.astype("<u8").tobytes())

    @staticmethod
    def load_sa(path) -> tuple[int, np.ndarray]:
        """Read (window_length, suffix array) back from disk."""
        with open(path, "rb") as fh:
            header = fh.read(4 + 2 + 4 + 8)
            if len(header) < 18 or header[:4] != INDEX_MAGIC:
                raise ValueError(f"{path}: not a suffix index file")
            version, window_length, count = struct.unpack("<HIQ", header[4:])
            if version != INDEX_VERSION:
                raise ValueError(f"{path}: unsupported index version {version}")
            data = fh.read(8 * count)
            if len(data) < 8 * count:
                raise ValueError(f"{path}: truncated suffix array")
        return window_length, np.frombuffer(data, dtype="<u8").astype(np.int64)


def build_suffix_index(
    corpus: Corpus, window_length: int, corpus_ref: str = ""
) -> SuffixIndex:
    if window_length < 1:
        raise ValueError("window_length must be >= 1")
    if corpus.num_docs == 0:
        raise ValueError("corpus is empty")
    max_tok = max((int(d.max()) for d in corpus.docs if len(d)), default=0)
    sentinel = max(max_tok + 1, corpus.vocab_size or 0)
    parts = []
    positions = []
    for di, doc in enumerate(corpus.docs):
        parts.append(doc.astype(np.int64))
        positions.extend((di, off) for off in range(len(doc)))
        parts.append(np.asarray([sentinel], dtype=np.int64))
        positions.append((-1, -1))
    stream = np.concatenate(parts)
    n = len(stream)
    valid = np.zeros(n, dtype=bool)
    cursor = 0
    any_window = False
    for doc in corpus.docs:
        L = len(doc)
        if L >= window_length:
            valid[cursor : cursor + L - window_length + 1] = True
            any_window = True
        cursor += L + 1
    if not any_window:
        raise ValueError(f"no document admits a window of length {window_length}")
    sa = _build_suffix_array(stream)
    return SuffixIndex(
        corpus_ref=corpus_ref,
        window_length=window_length,
        sa=sa,
        stream=stream,
        valid_start=valid,
        window_positions=tuple(positions),
    )


def count_window_repetitions(index: SuffixIndex) -> dict:
    """Map each distinct window occurring >= 2 times to its exact count.

    Keys are token tuples of length window_length. Overlapping occurrences
    are all counted.
    """
    W = index.window_length
    sas = index.sa[index.valid_start[index.sa]]
    m = len(sas)
    if m == 0:
        return {}
    # adjacent suffixes in SA order share a run iff their first W tokens match
    eq = np.ones(max(m - 1, 0), dtype=bool)
    stream = index.stream
    for j in range(W):
        eq &= stream[sas[:-1] + j] == stream[sas[1:] + j]
    counts: dict = {}
    run_start = 0
    for i in range(m - 1):
        if not eq[i]:
            if i + 1 - run_start >= 2:
                p = int(sas[run_start])
                counts[tuple(int(t) for t in stream[p : p + W])] = i + 1 - run_start
            run_start = i + 1
    if m - run_start >= 2:
        p = int(sas[run_start])
        counts[tuple(int(t) for t in stream[p : p + W])] = m - run_start
    return counts


def window_count(index: SuffixIndex, window: Sequence[int]) -> int:
    """Exact occurrence count of one window (binary search over the SA)."""
    W = index.window_length
    w = np.asarray(list(window), dtype=np.int64)
    if len(w) != W:
        raise ValueError(f"window must have length {W}")
    sas = index.sa[index.valid_start[index.sa]]
    stream = index.stream

    def cmp(pos: int) -> int:
        seg = stream[pos : pos + W]
        for x, y in zip(seg, w):
            if x < y:
                return -1
            if x > y:
                return 1
        return 0

    lo, hi = 0, len(sas)
    while lo < hi:
        mid = (lo + hi) // 2
        if cmp(int(sas[mid])) < 0:
            lo = mid + 1
        else:
            hi = mid
    first = lo
    lo, hi = first, len(sas)
    while lo < hi:
        mid = (lo + hi) // 2
        if cmp(int(sas[mid])) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return lo - first


@dataclass(frozen=True)
class RepetitionBucket:
    target_count: int
    tolerance: float = 0.01

    @property
    def low(self) -> float:
        return self.target_count * (1 - self.tolerance)

    @property
    def high(self) -> float:
        return self.target_count * (1 + self.tolerance)

    def contains(self, count: int) -> bool:
        return self.low <= count <= self.high


def filter_low_diversity(
    windows: Sequence[Sequence[int]],
    percentile: float,
    corpus_sample: Sequence[Sequence[int]],
):
    """Drop windows whose unique-token count falls below the sample percentile.

    The threshold is the nearest-rank percentile of unique-token counts over
    `corpus_sample`; survivors have unique_token_count >= threshold.
    """
    if not 0 < percentile <= 1:
        raise ValueError("percentile must be in (0, 1]")
    sample_counts = sorted(unique_token_count(w) for w in corpus_sample)
    if not sample_counts:
        raise ValueError("corpus_sample is empty")
    rank = max(1, int(np.ceil(percentile * len(sample_counts))))
    threshold = sample_counts[rank - 1]
    survivors = [w for w in windows if unique_token_count(w) >= threshold]
    return threshold, survivors


def select_bucket_targets(
    counts: dict,
    bucket: RepetitionBucket,
    sample_size: int,
    min_unique: int,
    seed: int,
    corpus_sample: Optional[Sequence[Sequence[int]]] = None,
    percentile: float = 0.05,
):
    """Seeded uniform draw of up to sample_size windows from a repetition bucket.

    Diversity filtering uses `min_unique` directly, or a percentile threshold
    estimated from `corpus_sample` when provided.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    eligible = [w for w, c in counts.items() if bucket.contains(c)]
    if corpus_sample is not None:
        threshold, eligible = filter_low_diversity(eligible, percentile, corpus_sample)
        min_unique = max(min_unique, threshold)
    eligible = [w for w in eligible if unique_token_count(w) >= min_unique]
    eligible.sort()
    if not eligible:
        raise ValueError("bucket is empty after diversity filtering")
    rng = np.random.default_rng(seed)
    k = min(sample_size, len(eligible))
    idx = rng.choice(len(eligible), size=k, replace=False)
    return [eligible[i] for i in sorted(int(i) for i in idx)]
