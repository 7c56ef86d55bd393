import numpy as np
import pytest

from mosaic import distances as dist
from mosaic._kernels import lev_banded, lev_recursive, osa_recursive

import oracles


RNG = np.random.default_rng(20240817)


def random_pair(rng, max_len, vocab):
    la, lb = int(rng.integers(max_len + 1)), int(rng.integers(max_len + 1))
    return oracles.random_token_seq(rng, la, vocab), oracles.random_token_seq(rng, lb, vocab)


def test_levenshtein_basics():
    assert dist.levenshtein([1, 2, 3], [1, 2, 3]) == 0
    assert dist.levenshtein([1, 2, 3], [1, 9, 3]) == 1
    assert dist.levenshtein([], [1, 2]) == 2
    assert dist.levenshtein([1, 2], []) == 2


def test_levenshtein_matches_dp_oracle():
    rng = np.random.default_rng(1)
    for _ in range(300):
        a, b = random_pair(rng, 12, 5)
        assert dist.levenshtein(a, b) == oracles.lev_dp_full(a, b)


def test_levenshtein_matches_memo_free_recursion():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b = random_pair(rng, 7, 5)
        a_arr = np.asarray(a, dtype=np.int64)
        b_arr = np.asarray(b, dtype=np.int64)
        expected = int(lev_recursive(a_arr, b_arr, len(a), len(b)))
        assert dist.levenshtein(a, b) == expected


def test_levenshtein_cutoff_agrees_with_exact():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = random_pair(rng, 16, 6)
        exact = dist.levenshtein(a, b)
        for cutoff in (0, 1, 3, 8, 20):
            got = dist.levenshtein(a, b, cutoff=cutoff)
            if exact <= cutoff:
                assert got == exact
            else:
                assert got is None


def test_lev_banded_kernel_matches_pure():
    rng = np.random.default_rng(4)
    for _ in range(300):
        a, b = random_pair(rng, 30, 8)
        a_arr, b_arr = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        for cutoff in (2, 5, 15):
            pure = dist.levenshtein(a, b, cutoff=cutoff)
            kern = int(lev_banded(a_arr, b_arr, cutoff))
            assert (pure if pure is not None else -1) == kern


def test_damerau_basics():
    assert dist.damerau_levenshtein([1, 2], [2, 1]) == 1
    assert dist.damerau_levenshtein([7], [7]) == 0


def test_damerau_matches_oracles():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = random_pair(rng, 10, 4)
        assert dist.damerau_levenshtein(a, b) == oracles.osa_dp_full(a, b)
    for _ in range(60):
        a, b = random_pair(rng, 6, 4)
        a_arr, b_arr = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        expected = int(osa_recursive(a_arr, b_arr, len(a), len(b)))
        assert dist.damerau_levenshtein(a, b) == expected


def test_damerau_never_exceeds_levenshtein():
    rng = np.random.default_rng(6)
    for _ in range(200):
        a, b = random_pair(rng, 12, 4)
        assert dist.damerau_levenshtein(a, b) <= dist.levenshtein(a, b)


def test_lcs_distance():
    assert dist.lcs_distance([1, 2, 3, 4], [1, 3]) == 2
    assert dist.lcs_distance([1, 2], [1, 2]) == 0
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = random_pair(rng, 12, 5)
        assert dist.lcs_distance(a, b) == max(len(a), len(b)) - oracles.lcs_len_dp(a, b)


def test_hamming():
    assert dist.hamming([1, 2, 3], [1, 0, 0]) == 2
    assert dist.hamming([], []) == 0
    with pytest.raises(ValueError):
        dist.hamming([1], [1, 2])


def test_levenshtein_at_most_hamming():
    rng = np.random.default_rng(8)
    for _ in range(100):
        L = int(rng.integers(1, 20))
        a = oracles.random_token_seq(rng, L, 5)
        b = oracles.random_token_seq(rng, L, 5)
        assert dist.levenshtein(a, b) <= dist.hamming(a, b)


def test_multiset_overlap():
    assert dist.multiset_overlap_distance([1, 1, 2], [1, 3, 3]) == pytest.approx(2 / 3)
    assert dist.multiset_overlap_distance([4, 5, 6], [6, 5, 4]) == 0.0
    with pytest.raises(ValueError):
        dist.multiset_overlap_distance([], [])
    rng = np.random.default_rng(9)
    for _ in range(100):
        a = oracles.random_token_seq(rng, int(rng.integers(1, 15)), 4)
        b = oracles.random_token_seq(rng, int(rng.integers(1, 15)), 4)
        assert dist.multiset_overlap_distance(a, b) == pytest.approx(
            oracles.multiset_overlap_naive(a, b)
        )


def test_jaccard_token():
    assert dist.jaccard_token([1, 2], [2, 3]) == pytest.approx(2 / 3)
    assert dist.jaccard_token([1], [2]) == 1.0
    assert dist.jaccard_token([5, 5], [5]) == 0.0
    with pytest.raises(ValueError):
        dist.jaccard_token([], [])


def test_jaccard_ngram():
    assert dist.jaccard_ngram([1, 2, 3], [2, 3, 4], 2) == pytest.approx(2 / 3)
    assert dist.jaccard_ngram([1, 2, 3], [1, 2, 3], 2) == 0.0
    assert dist.jaccard_ngram([1, 2], [3, 4], 2) == 1.0
    with pytest.raises(ValueError):
        dist.jaccard_ngram([1], [1, 2], 2)
    rng = np.random.default_rng(10)
    for _ in range(100):
        a = oracles.random_token_seq(rng, int(rng.integers(3, 15)), 4)
        b = oracles.random_token_seq(rng, int(rng.integers(3, 15)), 4)
        assert dist.jaccard_ngram(a, b, 3) == pytest.approx(
            oracles.jaccard_ngram_naive(a, b, 3)
        )


def test_metric_ranges_and_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = oracles.random_token_seq(rng, int(rng.integers(2, 12)), 5)
        b = oracles.random_token_seq(rng, int(rng.integers(2, 12)), 5)
        assert dist.levenshtein(a, b) == dist.levenshtein(b, a)
        assert dist.damerau_levenshtein(a, b) == dist.damerau_levenshtein(b, a)
        assert dist.lcs_distance(a, b) == dist.lcs_distance(b, a)
        for metric in (dist.multiset_overlap_distance, dist.jaccard_token):
            v = metric(a, b)
            assert 0 <= v <= 1
            assert v == pytest.approx(metric(b, a))


def test_identity_distances_zero():
    rng = np.random.default_rng(12)
    for _ in range(50):
        a = oracles.random_token_seq(rng, int(rng.integers(2, 20)), 6)
        assert dist.levenshtein(a, a) == 0
        assert dist.damerau_levenshtein(a, a) == 0
        assert dist.lcs_distance(a, a) == 0
        assert dist.hamming(a, a) == 0
        assert dist.multiset_overlap_distance(a, a) == 0.0
        assert dist.jaccard_token(a, a) == 0.0


def test_kendall_tau_endpoints():
    L = 10
    assert dist.kendall_tau(list(range(L))) == 0.0
    assert dist.kendall_tau(list(reversed(range(L)))) == 1.0


def test_kendall_tau_matches_pair_counting():
    rng = np.random.default_rng(13)
    for _ in range(200):
        L = int(rng.integers(2, 51))
        perm = [int(i) for i in rng.permutation(L)]
        assert dist.kendall_tau(perm) == pytest.approx(
            oracles.kendall_tau_pairs(perm), abs=1e-12
        )


def test_kendall_tau_rejects_bad_input():
    with pytest.raises(ValueError):
        dist.kendall_tau([0])
    with pytest.raises(ValueError):
        dist.kendall_tau([0, 0, 2])


def test_ngram_overlap_count():
    a = list(range(100))
    assert dist.ngram_overlap_count(a, a, 1) == 100
    assert dist.ngram_overlap_count([1, 2, 3], [7, 8, 9], 1) == 0
    with pytest.raises(ValueError):
        dist.ngram_overlap_count([1], [1, 2], 2)
    rng = np.random.default_rng(14)
    for _ in range(100):
        a = oracles.random_token_seq(rng, int(rng.integers(3, 21)), 4)
        b = oracles.random_token_seq(rng, int(rng.integers(3, 21)), 4)
        assert dist.ngram_overlap_count(a, b, 2) == oracles.ngram_overlap_nested(a, b, 2)
