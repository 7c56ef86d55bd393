"""Linear corpus scan for fuzzy duplicates of target sequences.

A sliding multiset-overlap counter per target prunes windows that cannot
be within the Levenshtein threshold; surviving windows get a banded
Levenshtein check. Matches go through double-count resolution so no
corpus token backs two counted duplicates of the same target.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .corpus import Corpus, WindowRef
from .distances import levenshtein

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanConfig:
    window_length: int = 100
    step: int = 1
    max_distance: int = 50
    prune_min_common: Optional[int] = None  # defaults to window_length - max_distance
    sample_fraction: float = 0.05
    seed: int = 0
    shuffle_docs: bool = False
    cross_target_exclusive: bool = False
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.sample_fraction <= 1:
            raise ValueError("sample_fraction must be in (0, 1]")
        pm = self.resolved_prune_min_common
        if pm > self.window_length:
            raise ValueError("prune_min_common cannot exceed window_length")

    @property
    def resolved_prune_min_common(self) -> int:
        if self.prune_min_common is not None:
            return self.prune_min_common
        return max(0, self.window_length - self.max_distance)


@dataclass
class TargetReport:
    target_id: str
    raw_counts: list  # index d: duplicates at exactly distance d
    cumulative: list
    extrapolated: list
    matches: list  # retained (WindowRef, distance) after overlap resolution


@dataclass
class ScanReport:
    targets: list  # list[TargetReport]
    tokens_scanned: int
    fraction_scanned: float
    config: ScanConfig


def overlap_prune_check(shared_count: int, threshold: int) -> bool:
    """True iff the window may still be within the Levenshtein threshold.

    `shared_count` is the multiset-intersection size between the current
    window and the target; below `threshold` shared tokens, the edit
    distance provably exceeds window_length - threshold.
    """
    return shared_count >= threshold


def multiset_shared(a: Sequence[int], b: Sequence[int]) -> int:
    ca, cb = Counter(map(int, a)), Counter(map(int, b))
    return sum(min(ca[t], cb[t]) for t in ca)


def cumulative_histogram(raw_counts: Sequence[int]) -> list:
    """cumulative[d] = sum of raw_counts[0..d]."""
    out = []
    total = 0
    for c in raw_counts:
        total += c
        out.append(total)
    return out


def resolve_overlaps(matches, window_length: int):
    """Greedy subset of matches such that no token position backs two.

    Matches are retained in order of (distance ascending, doc, offset
    ascending); a match is dropped when any of its token positions is
    already covered by a retained match.
    """
    retained = []
    covered: dict = {}  # doc_index -> list of (start, end) retained intervals
    for ref, dist in sorted(matches, key=lambda m: (m[1], m[0].doc_index, m[0].offset)):
        start, end = ref.offset, ref.offset + window_length
        intervals = covered.setdefault(ref.doc_index, [])
        if any(start < e and s < end for s, e in intervals):
            continue
        intervals.append((start, end))
        retained.append((ref, dist))
    retained.sort(key=lambda m: (m[0].doc_index, m[0].offset))
    return retained


def _sampled_docs(corpus: Corpus, config: ScanConfig):
    """Indices of the leading documents making up the sample fraction."""
    order = list(range(corpus.num_docs))
    if config.shuffle_docs:
        rng = np.random.default_rng(config.seed)
        order = [int(i) for i in rng.permutation(corpus.num_docs)]
    total = corpus.total_tokens
    budget = config.sample_fraction * total
    chosen = []
    scanned = 0
    for di in order:
        if scanned >= budget:
            break
        chosen.append(di)
        scanned += len(corpus.docs[di])
    return chosen, scanned


def _scan_doc_segments(doc: np.ndarray, config: ScanConfig, threads: int):
    """Split one document into contiguous segments for worker threads."""
    n_windows = len(doc) - config.window_length + 1
    if n_windows <= 0:
        return []
    per = max(1, -(-n_windows // threads))
    return [(s, min(s + per, n_windows)) for s in range(0, n_windows, per)]


def scan_fuzzy_duplicates(
    corpus: Corpus,
    targets: Sequence[Sequence[int]],
    config: ScanConfig,
    target_ids: Optional[Sequence[str]] = None,
) -> ScanReport:
    W = config.window_length
    for t in targets:
        if len(t) != W:
            raise ValueError(f"target length {len(t)} != window_length {W}")
    if target_ids is None:
        target_ids = [str(i) for i in range(len(targets))]

    tarr = np.asarray([list(map(int, t)) for t in targets], dtype=np.int64)
    if tarr.size == 0:
        raise ValueError("no targets")
    chosen, scanned = _sampled_docs(corpus, config)
    V = int(tarr.max()) + 1
    tcounts = np.zeros((len(targets), V), dtype=np.int32)
    for ti, t in enumerate(tarr):
        for tok in t:
            tcounts[ti, tok] += 1
    thresholds = np.full(len(targets), config.resolved_prune_min_common, dtype=np.int64)

    per_target_matches: list = [[] for _ in targets]
    threads = max(1, config.threads)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for di in chosen:
            doc = corpus.docs[di].astype(np.int64)
            segments = _scan_doc_segments(doc, config, threads)
            if not segments:
                continue

            def run(seg):
                return _kernels.scan_segment(
                    doc, seg[0], seg[1], W, tarr, tcounts, thresholds, config.max_distance
                )

            results = list(pool.map(run, segments)) if pool else [run(s) for s in segments]
            for pos, tgt, dist in results:
                for p, t, d in zip(pos, tgt, dist):
                    if int(p) % config.step == 0:
                        per_target_matches[int(t)].append(
                            (WindowRef(di, int(p), W), int(d))
                        )
    finally:
        if pool:
            pool.shutdown()

    reports = []
    globally_covered: dict = {}
    for ti, tid in enumerate(target_ids):
        matches = sorted(
            per_target_matches[ti], key=lambda m: (m[0].doc_index, m[0].offset)
        )
        retained = resolve_overlaps(matches, W)
        if config.cross_target_exclusive:
            kept = []
            for ref, dist in retained:
                intervals = globally_covered.setdefault(ref.doc_index, [])
                s, e = ref.offset, ref.offset + W
                if any(s < e2 and s2 < e for s2, e2 in intervals):
                    continue
                intervals.append((s, e))
                kept.append((ref, dist))
            retained = kept
        raw = [0] * (config.max_distance + 1)
        for _, dist in retained:
            raw[dist] += 1
        cum = cumulative_histogram(raw)
        frac = scanned / corpus.total_tokens if corpus.total_tokens else 1.0
        reports.append(
            TargetReport(
                target_id=tid,
                raw_counts=raw,
                cumulative=cum,
                extrapolated=[c / frac for c in cum],
                matches=retained,
            )
        )
    fraction = scanned / corpus.total_tokens if corpus.total_tokens else 1.0
    logger.info(
        "scanned %d tokens (%.3f of corpus) for %d targets",
        scanned,
        fraction,
        len(targets),
    )
    return ScanReport(
        targets=reports,
        tokens_scanned=scanned,
        fraction_scanned=fraction,
        config=config,
    )


def scan_fuzzy_duplicates_naive(
    corpus: Corpus,
    targets: Sequence[Sequence[int]],
    config: ScanConfig,
    target_ids: Optional[Sequence[str]] = None,
    use_kernel: bool = True,
) -> ScanReport:
    """Unpruned single-threaded reference scanner.

    Evaluates the Levenshtein distance for every window against every
    target; no multiset pruning, no sharding. `use_kernel=False` switches
    to the pure-python distance for small inputs.
    """
    W = config.window_length
    if target_ids is None:
        target_ids = [str(i) for i in range(len(targets))]
    tarr = [np.asarray(list(map(int, t)), dtype=np.int64) for t in targets]
    chosen, scanned = _sampled_docs(corpus, config)
    per_target_matches: list = [[] for _ in targets]
    for di in chosen:
        doc = corpus.docs[di].astype(np.int64)
        for off in range(0, len(doc) - W + 1, config.step):
            win = doc[off : off + W]
            for ti, t in enumerate(tarr):
                if use_kernel:
                    d = int(_kernels.lev_banded(win, t, config.max_distance))
                    if d < 0:
                        continue
                else:
                    dv = levenshtein(win, t, cutoff=config.max_distance)
                    if dv is None:
                        continue
                    d = dv
                per_target_matches[ti].append((WindowRef(di, off, W), d))

    reports = []
    for ti, tid in enumerate(target_ids):
        retained = resolve_overlaps(per_target_matches[ti], W)
        raw = [0] * (config.max_distance + 1)
        for _, dist in retained:
            raw[dist] += 1
        cum = cumulative_histogram(raw)
        frac = scanned / corpus.total_tokens if corpus.total_tokens else 1.0
        reports.append(
            TargetReport(tid, raw, cum, [c / frac for c in cum], retained)
        )
    fraction = scanned / corpus.total_tokens if corpus.total_tokens else 1.0
    return ScanReport(reports, scanned, fraction, config)


def extrapolate_counts(report: ScanReport, fraction_scanned: Optional[float] = None) -> ScanReport:
    """Recompute extrapolated cumulative counts as cumulative / fraction."""
    frac = fraction_scanned if fraction_scanned is not None else report.fraction_scanned
    if frac <= 0:
        raise ValueError("fraction_scanned must be > 0")
    for tr in report.targets:
        tr.extrapolated = [c / frac for c in tr.cumulative]
    return report
