"""Simulate sequence-level n-gram deduplication over a fuzzy-duplicate set.

A duplicate is removed iff it shares at least one contiguous n-gram with
the target sequence; positions are irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .distances import _ngram_set
from .fuzzyscan import cumulative_histogram


@dataclass(frozen=True)
class DedupPolicy:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass
class DedupResult:
    policy: DedupPolicy
    surviving_raw: list  # per distance d: survivors at exactly d
    surviving_cumulative: list
    survivors: list  # indices into the input duplicate list


def simulate_ngram_dedup(
    target: Sequence[int],
    duplicates: Sequence[tuple],
    policy: DedupPolicy,
    max_distance: int | None = None,
) -> DedupResult:
    """Apply one n-gram policy to (sequence, distance) duplicates.

    Returns per-distance surviving counts; a duplicate survives iff it has
    no n-gram in common with the target.
    """
    n = policy.n
    if len(target) < n:
        raise ValueError(f"target shorter than policy n={n}")
    target_grams = _ngram_set(target, n)
    if max_distance is None:
        max_distance = max((d for _, d in duplicates), default=0)
    raw = [0] * (max_distance + 1)
    survivors = []
    for idx, (seq, dist) in enumerate(duplicates):
        shared = len(seq) >= n and not target_grams.isdisjoint(_ngram_set(seq, n))
        if not shared:
            survivors.append(idx)
            if dist <= max_distance:
                raw[dist] += 1
    return DedupResult(policy, raw, cumulative_histogram(raw), survivors)


def dedup_sweep(
    target: Sequence[int],
    duplicates: Sequence[tuple],
    policies: Sequence[DedupPolicy],
    max_distance: int | None = None,
) -> list:
    """One survivor curve per policy, as rows (policy_n, distance, raw, cumulative)."""
    if max_distance is None:
        max_distance = max((d for _, d in duplicates), default=0)
    rows = []
    for policy in policies:
        res = simulate_ngram_dedup(target, duplicates, policy, max_distance)
        for d in range(max_distance + 1):
            rows.append(
                {
                    "policy_n": policy.n,
                    "distance": d,
                    "surviving_raw": res.surviving_raw[d],
                    "surviving_cumulative": res.surviving_cumulative[d],
                }
            )
    return rows
