"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`."""

import contextlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from mosaic import distances as dist
from mosaic._kernels import lcs_recursive, lev_recursive, osa_recursive
from mosaic.canarygen import (
    CanarySpec,
    ReplaceConfig,
    UniformVocabProvider,
    gen_insert,
    gen_remove,
    gen_replace,
    gen_shuffle,
)
from mosaic.corpus import Corpus
from mosaic.dedupsim import DedupPolicy, simulate_ngram_dedup
from mosaic.dupfinder import build_suffix_index, count_window_repetitions, window_count
from mosaic.fuzzyscan import ScanConfig, scan_fuzzy_duplicates, scan_fuzzy_duplicates_naive
from mosaic.memmetrics import CalibrationCurve, ScoreRecord, mink_score, nu_eq, rho, roc_auc, smooth_curve

import oracles

ROOT = Path(__file__).resolve().parent.parent


@contextlib.contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\n[ACCEPTANCE] FAIL: {name}", flush=True)
        raise
    print(f"\n[ACCEPTANCE] PASS: {name}", flush=True)


def test_distance_oracle_suite():
    with criterion("distance oracle suite (< 60 s)"):
        start = time.monotonic()
        rng = np.random.default_rng(101)

        def pair(max_len, vocab=5):
            la, lb = int(rng.integers(max_len + 1)), int(rng.integers(max_len + 1))
            a = oracles.random_token_seq(rng, la, vocab)
            b = oracles.random_token_seq(rng, lb, vocab)
            return a, b, np.asarray(a, np.int64), np.asarray(b, np.int64)

        # leg 1: >= 1,000 short pairs against exhaustive memo-free recursion
        # (lengths <= 8 for volume, a handful up to 11-12 for depth)
        for _ in range(1000):
            a, b, aa, bb = pair(8)
            assert dist.levenshtein(a, b) == int(lev_recursive(aa, bb, len(a), len(b)))
            assert dist.damerau_levenshtein(a, b) == int(osa_recursive(aa, bb, len(a), len(b)))
            assert dist.lcs_distance(a, b) == max(len(a), len(b)) - int(
                lcs_recursive(aa, bb, len(a), len(b))
            )
        for la, lb in [(12, 12), (12, 10), (9, 12)]:
            a = oracles.random_token_seq(rng, la, 5)
            b = oracles.random_token_seq(rng, lb, 5)
            aa, bb = np.asarray(a, np.int64), np.asarray(b, np.int64)
            assert dist.levenshtein(a, b) == int(lev_recursive(aa, bb, la, lb))
            assert dist.lcs_distance(a, b) == max(la, lb) - int(lcs_recursive(aa, bb, la, lb))
        for la, lb in [(11, 11), (11, 9), (10, 11)]:
            a = oracles.random_token_seq(rng, la, 5)
            b = oracles.random_token_seq(rng, lb, 5)
            aa, bb = np.asarray(a, np.int64), np.asarray(b, np.int64)
            assert dist.damerau_levenshtein(a, b) == int(osa_recursive(aa, bb, la, lb))

        # set-family metrics against direct-definition brute force, same pairs
        for _ in range(1000):
            a, b, _, _ = pair(12)
            if len(a) == len(b):
                assert dist.hamming(a, b) == oracles.hamming_naive(a, b)
            if a or b:
                if a and b:
                    assert dist.multiset_overlap_distance(a, b) == pytest.approx(
                        oracles.multiset_overlap_naive(a, b), abs=1e-12
                    )
                    assert dist.jaccard_token(a, b) == pytest.approx(
                        oracles.jaccard_token_naive(a, b), abs=1e-12
                    )
                if len(a) >= 3 and len(b) >= 3:
                    assert dist.jaccard_ngram(a, b, 3) == pytest.approx(
                        oracles.jaccard_ngram_naive(a, b, 3), abs=1e-12
                    )

        # leg 2: 200 pairs of length <= 64 against quadratic full-matrix DP
        for _ in range(200):
            a, b, _, _ = pair(64, vocab=9)
            assert dist.levenshtein(a, b) == oracles.lev_dp_full(a, b)
            assert dist.damerau_levenshtein(a, b) == oracles.osa_dp_full(a, b)
            assert dist.lcs_distance(a, b) == max(len(a), len(b)) - oracles.lcs_len_dp(a, b)
            L = min(len(a), len(b))
            if L:
                assert dist.hamming(a[:L], b[:L]) == oracles.hamming_naive(a[:L], b[:L])
                assert dist.multiset_overlap_distance(a[:L] or [0], b[:L] or [0]) == pytest.approx(
                    oracles.multiset_overlap_naive(a[:L] or [0], b[:L] or [0]), abs=1e-12
                )

        # kendall tau vs O(L^2) pair counting on >= 500 permutations
        for _ in range(500):
            L = int(rng.integers(2, 60))
            perm = [int(i) for i in rng.permutation(L)]
            assert abs(dist.kendall_tau(perm) - oracles.kendall_tau_pairs(perm)) <= 1e-12

        elapsed = time.monotonic() - start
        assert elapsed < 60, f"distance suite took {elapsed:.1f}s"


def _planted_scan_corpus(rng, targets, n_docs, doc_len, vocab):
    """Random docs with near-copies of each target at distances 0-50 and
    decoys mutated well past 50."""
    W = len(targets[0])
    docs = [rng.integers(vocab, size=doc_len).astype(np.uint32) for _ in range(n_docs)]

    def plant(seq):
        di = int(rng.integers(n_docs))
        off = int(rng.integers(doc_len - W))
        docs[di][off : off + W] = seq

    for t in targets:
        for d in (0, 1, 5, 17, 33, 50):
            copy = np.asarray(t, dtype=np.uint32).copy()
            pos = rng.choice(W, size=d, replace=False)
            for p in pos:
                copy[p] = int(rng.integers(vocab))
            plant(copy)
        for d in (60, 75, 95):  # decoys beyond the distance cap
            copy = np.asarray(t, dtype=np.uint32).copy()
            pos = rng.choice(W, size=d, replace=False)
            for p in pos:
                copy[p] = int(rng.integers(vocab))
            plant(copy)
    return Corpus(docs=tuple(docs), vocab_size=vocab)


def test_scanner_equivalence():
    with criterion("scanner equivalence on 20 planted corpora (< 5 min)"):
        start = time.monotonic()
        W, vocab = 100, 50000
        cfg = ScanConfig(window_length=W, max_distance=50, sample_fraction=1.0, threads=4)
        for trial in range(20):
            rng = np.random.default_rng(1000 + trial)
            targets = [[int(t) for t in rng.integers(vocab, size=W)] for _ in range(3)]
            corpus = _planted_scan_corpus(rng, targets, n_docs=20, doc_len=5000, vocab=vocab)
            assert corpus.total_tokens <= 100_000
            fast = scan_fuzzy_duplicates(corpus, targets, cfg)
            slow = scan_fuzzy_duplicates_naive(corpus, targets, cfg)
            for tf, ts in zip(fast.targets, slow.targets):
                assert tf.raw_counts == ts.raw_counts
                assert tf.cumulative == ts.cumulative
                assert [(m[0].doc_index, m[0].offset, m[1]) for m in tf.matches] == [
                    (m[0].doc_index, m[0].offset, m[1]) for m in ts.matches
                ]
            # at least one planted duplicate per target survived resolution
            assert all(tr.cumulative[-1] >= 1 for tr in fast.targets)
        elapsed = time.monotonic() - start
        assert elapsed < 300, f"scanner equivalence took {elapsed:.1f}s"


def test_suffix_index_equivalence():
    with criterion("suffix-index counts == hash-map oracle; planted k in {3,100,1000}"):
        # natural-repeat corpus (small vocab) vs oracle, exact
        rng = np.random.default_rng(2024)
        small = Corpus(
            docs=tuple(rng.integers(5, size=int(rng.integers(500, 3000))).astype(np.uint32)
                       for _ in range(40)),
            vocab_size=5,
        )
        for Wn in (2, 4, 8):
            idx = build_suffix_index(small, Wn)
            got = count_window_repetitions(idx)
            expected = {w: c for w, c in
                        oracles.window_counts_hashmap(small.docs, Wn).items() if c >= 2}
            assert got == expected

        # ~1M-token corpus with windows planted k in {3, 100, 1000} times
        W, vocab = 25, 10000
        n_docs, doc_len = 500, 2000
        docs = [rng.integers(vocab, size=doc_len).astype(np.uint32) for _ in range(n_docs)]
        # disjoint W-aligned slots keep plants from overwriting each other
        slots = [(di, off) for di in range(n_docs) for off in range(0, doc_len - W + 1, W)]
        picks = rng.choice(len(slots), size=3 + 100 + 1000, replace=False)
        planted = {}
        cursor = 0
        for k in (3, 100, 1000):
            seq = rng.integers(vocab, size=W).astype(np.uint32)
            for s in picks[cursor : cursor + k]:
                di, off = slots[int(s)]
                docs[di][off : off + W] = seq
            cursor += k
            planted[tuple(int(t) for t in seq)] = k
        corpus = Corpus(docs=tuple(docs), vocab_size=vocab)
        assert corpus.total_tokens == 1_000_000
        idx = build_suffix_index(corpus, W)
        counts = count_window_repetitions(idx)
        oracle_counts = oracles.window_counts_hashmap(corpus.docs, W)
        assert counts == {w: c for w, c in oracle_counts.items() if c >= 2}
        for seq, k in planted.items():
            assert window_count(idx, seq) == k
            assert counts[seq] == k


def test_extrapolation_statistics():
    with criterion("5% scan extrapolation within 3-sigma binomial in >= 19/20 trials"):
        W, vocab = 20, 50000
        n_docs, doc_len = 400, 250
        passes = 0
        for trial in range(20):
            rng = np.random.default_rng(3000 + trial)
            target = [int(t) for t in rng.integers(vocab, size=W)]
            docs = [rng.integers(vocab, size=doc_len).astype(np.uint32)
                    for _ in range(n_docs)]
            for _ in range(300):  # plant uniformly across the corpus
                di = int(rng.integers(n_docs))
                off = int(rng.integers(doc_len - W))
                docs[di][off : off + W] = np.asarray(target, dtype=np.uint32)
            corpus = Corpus(docs=tuple(docs), vocab_size=vocab)
            base = dict(window_length=W, max_distance=2)
            full = scan_fuzzy_duplicates(
                corpus, [target], ScanConfig(**base, sample_fraction=1.0)
            )
            n_full = full.targets[0].cumulative[-1]
            sampled = scan_fuzzy_duplicates(
                corpus, [target],
                ScanConfig(**base, sample_fraction=0.05, shuffle_docs=True, seed=trial),
            )
            p = sampled.fraction_scanned
            extrap = sampled.targets[0].extrapolated[-1]
            sigma = np.sqrt(n_full * p * (1 - p))
            if abs(extrap - n_full) <= 3 * sigma / p:
                passes += 1
        assert passes >= 19, f"only {passes}/20 trials within 3 sigma"


def test_generator_contracts():
    with criterion("generator contracts hold on 100% of >= 1,000 outputs each"):
        vocab = 50257
        provider = UniformVocabProvider(vocab)
        rng = np.random.default_rng(7)

        def canary(i, n_dup=10):
            return CanarySpec(
                ref=tuple(int(t) for t in rng.integers(vocab, size=100)),
                id=f"c{i}", n_dup=n_dup,
            )

        # replace: hamming == R on every output
        n_out = 0
        for i in range(120):
            R = int(rng.integers(1, 51))
            strategy = ("evenly_consistent", "random_consistent",
                        "random_inconsistent")[i % 3]
            ds = gen_replace(canary(i), ReplaceConfig(R=R, strategy=strategy,
                                                      provider=provider, seed=i))
            for dup in ds.dups[1:]:
                assert dist.hamming(ds.canary.ref, dup) == R
                n_out += 1
        assert n_out >= 1000

        # insert: length and subsequence on every output
        n_out = 0
        for i in range(120):
            n = (5, 10, 20)[i % 3]
            x = (1, 3, 7)[(i // 3) % 3]
            ds = gen_insert(canary(i), n, x, vocab, seed=i)
            gaps = 100 // n - 1
            for dup in ds.dups[1:]:
                assert len(dup) == 100 + gaps * x
                it = iter(dup)
                assert all(any(tok == y for y in it) for tok in ds.canary.ref)
                n_out += 1
        assert n_out >= 1000

        # shuffle: multiset preservation and achieved-tau recomputation
        n_out = 0
        for i in range(112):
            n = (10, 20, 25)[i % 3]
            tau = (0.3, 0.5, 0.7)[(i // 3) % 3]
            ds = gen_shuffle(canary(i), n, tau, tolerance=0.08, seed=i)
            ref = ds.canary.ref
            grams = [ref[g : g + n] for g in range(0, 100, n)]
            for dup, t in zip(ds.dups[1:], ds.achieved_tau[1:]):
                assert sorted(dup) == sorted(ref)
                order = [grams.index(dup[j : j + n]) for j in range(0, 100, n)]
                pos_perm = [0] * 100
                for new_idx, old_idx in enumerate(order):
                    for off in range(n):
                        pos_perm[old_idx * n + off] = new_idx * n + off
                assert abs(oracles.kendall_tau_pairs(pos_perm) - t) <= 1e-12
                n_out += 1
        assert n_out >= 1000

        # remove: levenshtein == R on every output
        n_out = 0
        for i in range(120):
            R = int(rng.integers(1, 51))
            mode = ("prefix", "suffix", "random_even")[i % 3]
            ds = gen_remove(canary(i), R, mode, seed=i)
            for dup in ds.dups[1:]:
                assert dist.levenshtein(ds.canary.ref, dup) == R
                n_out += 1
        assert n_out >= 1000


def test_dedupsim_fixed_points():
    with criterion("dedup-sim fixed points and monotonicity over n in {13,20,25,50}"):
        rng = np.random.default_rng(8)
        target = [int(t) for t in rng.integers(1000, size=100)]

        # an exact copy is removed at every n <= 100
        for n in range(1, 101):
            res = simulate_ngram_dedup(target, [(list(target), 0)], DedupPolicy(n))
            assert res.survivors == []

        # a duplicate with every n-th token replaced by an out-of-vocab token
        # shares no n-gram with the target and survives
        for n in (13, 20, 25, 50):
            broken = list(target)
            for p in range(n - 1, 100, n):
                broken[p] = 10_000 + p
            res = simulate_ngram_dedup(target, [(broken, 50)], DedupPolicy(n))
            assert res.survivors == [0]

        # monotonicity on >= 100 random fixtures
        for trial in range(100):
            rng = np.random.default_rng(9000 + trial)
            tgt = [int(t) for t in rng.integers(8, size=100)]
            dups = []
            for _ in range(15):
                d = list(tgt)
                for _ in range(int(rng.integers(0, 60))):
                    d[int(rng.integers(100))] = int(rng.integers(8))
                dups.append((d, int(dist.levenshtein(tgt, d))))
            prev = None
            for n in (13, 20, 25, 50):
                cur = set(simulate_ngram_dedup(tgt, dups, DedupPolicy(n)).survivors)
                if prev is not None:
                    assert prev <= cur
                prev = cur


def test_memorization_math_fixed_points():
    with criterion("memorization math fixed points (rho, nu_eq, AUC, smoothing, min-k)"):
        # rho fixed point
        assert abs(rho(6.36, 10) - 0.5956) < 0.0001

        rng = np.random.default_rng(10)

        # nu_eq inverts curve points exactly
        for _ in range(100):
            n_pts = int(rng.integers(2, 10))
            nus = np.sort(rng.choice(np.arange(1, 200), size=n_pts, replace=False)).astype(float)
            phis = np.sort(rng.random(n_pts))
            while len(set(phis)) < n_pts:
                phis = np.sort(rng.random(n_pts))
            curve = CalibrationCurve(points=list(zip(nus, phis)))
            for nu_val, phi_val in curve.points:
                assert nu_eq(curve, phi_val) == nu_val

        # roc_auc vs pair-counting oracle on >= 500 random labeled sets
        checked = 0
        while checked < 500:
            n = int(rng.integers(4, 30))
            scored = [(float(rng.integers(6)), bool(rng.integers(2))) for _ in range(n)]
            members = sum(m for _, m in scored)
            if members == 0 or members == n:
                continue
            for orientation in ("lower_is_member", "higher_is_member"):
                assert roc_auc(scored, orientation) == pytest.approx(
                    oracles.auc_pair_count(scored, orientation), abs=1e-12
                )
            checked += 1

        # smooth_curve vs convolution oracle
        for _ in range(100):
            n_pts = int(rng.integers(2, 12))
            phis = sorted(float(p) for p in rng.random(n_pts))
            curve = CalibrationCurve(points=list(enumerate(phis)))
            sm = smooth_curve(curve, window=3)
            assert [p for _, p in sm.points] == pytest.approx(
                oracles.moving_average_conv(phis, 3), abs=1e-12
            )

        # min-k at 100% equals the mean log-probability
        for _ in range(200):
            lp = (-rng.random(int(rng.integers(1, 60)))).tolist()
            rec = ScoreRecord(canary_id="x", member=True, logprobs_target=tuple(lp))
            assert abs(mink_score(rec, 1.0) - float(np.mean(lp))) <= 1e-12


def test_golden_pipeline_byte_for_byte(tmp_path):
    with criterion("end-to-end golden pipeline reproduces committed bytes"):
        sys.path.insert(0, str(ROOT / "scripts"))
        try:
            import regen_golden
        finally:
            sys.path.pop(0)
        regen_golden.run_pipeline(tmp_path)
        golden_dir = ROOT / "tests" / "golden"
        names = ["dups.jsonl", "injected.jsonl", "scan.json", "dedup.json", "dedup.csv"]
        assert sorted(p.name for p in golden_dir.iterdir()) == sorted(names)
        for name in names:
            got = (tmp_path / name).read_bytes()
            want = (golden_dir / name).read_bytes()
            assert got == want, f"{name} differs from committed golden output"
