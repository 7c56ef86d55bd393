"""Fuzzy-duplicate generators for reference canaries, plus corpus injection.

Every generator is deterministic given its seed, always emits the exact
copy as the first duplicate, and records provenance (algorithm,
parameters, seed) on the resulting set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import httpx
import numpy as np

from .corpus import Corpus
from .distances import kendall_tau

DEFAULT_N_DUP = 10


@dataclass(frozen=True)
class CanarySpec:
    ref: tuple
    id: str
    n_dup: int = DEFAULT_N_DUP
    member: bool = True
    metadata: dict = field(default_factory=dict)  # free-form provenance (e.g. sampling temperature)

    def __post_init__(self):
        object.__setattr__(self, "ref", tuple(int(t) for t in self.ref))
        if self.n_dup < 1:
            raise ValueError("n_dup must be >= 1")


@dataclass
class FuzzyDupSet:
    canary: CanarySpec
    dups: list  # token tuples; dups[0] == canary.ref
    generator: dict  # {"algo": ..., "params": {...}, "seed": ...}
    achieved_tau: Optional[list] = None
    scatter_grams: Optional[list] = None  # per perturbed dup: list of gram tuples

    def __post_init__(self):
        if not self.dups or tuple(self.dups[0]) != self.canary.ref:
            raise ValueError("dups[0] must equal the reference canary")


class ReplacementProvider:
    """Source of replacement tokens; must never return the original token."""

    def draw(self, rng: np.random.Generator, tokens: Sequence[int], position: int, k: int) -> int:
        raise NotImplementedError


class UniformVocabProvider(ReplacementProvider):
    """Uniform draw over the vocabulary, excluding the original token."""

    def __init__(self, vocab_size: int):
        if vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        self.vocab_size = vocab_size

    def draw(self, rng, tokens, position, k):
        original = int(tokens[position])
        v = int(rng.integers(self.vocab_size - 1))
        return v if v < original else v + 1


class ExternalTopKProvider(ReplacementProvider):
    """Replacement candidates from an HTTP top-k endpoint (POST /topk).

    The server returns candidates sorted by probability with the original
    token excluded; the uniform draw from the top-k happens here, with the
    caller's seeded RNG.
    """

    def __init__(self, endpoint: str, client: Optional[httpx.Client] = None, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)
        self._cache: dict = {}

    def candidates(self, tokens: Sequence[int], position: int, k: int) -> list:
        key = (tuple(tokens), position, k)
        if key not in self._cache:
            resp = self._client.post(
                self.endpoint + "/topk",
                json={
                    "tokens": [int(t) for t in tokens],
                    "positions": [position],
                    "k": k,
                    "exclude_original": True,
                },
            )
            resp.raise_for_status()
            cands = resp.json()["candidates"][0]
            ids = [c["token_id"] for c in cands if c.get("token_id") is not None]
            self._cache[key] = ids
        return self._cache[key]

    def draw(self, rng, tokens, position, k):
        ids = self.candidates(tokens, position, k)
        original = int(tokens[position])
        ids = [t for t in ids if t != original]
        if not ids:
            raise RuntimeError(
                f"provider returned no usable replacement for position {position}"
            )
        return int(ids[int(rng.integers(len(ids)))])


@dataclass(frozen=True)
class ReplaceConfig:
    R: int
    strategy: str = "random_inconsistent"  # evenly_consistent | random_consistent | random_inconsistent
    provider: ReplacementProvider = None
    k: int = 1
    seed: int = 0


STRATEGIES = ("evenly_consistent", "random_consistent", "random_inconsistent")


def select_positions(L: int, R: int, strategy: str, n_dup: int, seed) -> list:
    """Position sets to perturb for each of the n_dup-1 modified duplicates.

    evenly_consistent draws one position from each of R equal segments and
    shares the set; random_consistent shares one uniform R-subset;
    random_inconsistent draws an independent R-subset per duplicate.
    """
    if R > L:
        raise ValueError(f"R={R} exceeds sequence length {L}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    count = max(0, n_dup - 1)
    if strategy == "evenly_consistent":
        positions = []
        for r in range(1, R + 1):
            lo = (r - 1) * L // R
            hi = r * L // R
            positions.append(int(rng.integers(lo, hi)))
        return [sorted(positions)] * count
    if strategy == "random_consistent":
        chosen = sorted(int(i) for i in rng.choice(L, size=R, replace=False))
        return [chosen] * count
    return [
        sorted(int(i) for i in rng.choice(L, size=R, replace=False))
        for _ in range(count)
    ]


def gen_replace(canary: CanarySpec, config: ReplaceConfig) -> FuzzyDupSet:
    """Duplicates differing from the reference at exactly R positions."""
    ref = canary.ref
    if config.provider is None:
        raise ValueError("ReplaceConfig.provider is required")
    rng = np.random.default_rng(config.seed)
    position_sets = select_positions(
        len(ref), config.R, config.strategy, canary.n_dup, rng
    )
    dups = [ref]
    for positions in position_sets:
        out = list(ref)
        for pos in positions:
            out[pos] = int(config.provider.draw(rng, ref, pos, config.k))
        dups.append(tuple(out))
    return FuzzyDupSet(
        canary=canary,
        dups=dups,
        generator={
            "algo": "replace",
            "params": {"R": config.R, "strategy": config.strategy, "k": config.k},
            "seed": config.seed,
        },
    )


def _grams(ref: tuple, n: int) -> list:
    if n > len(ref):
        raise ValueError(f"gram size {n} exceeds sequence length {len(ref)}")
    return [ref[i : i + n] for i in range(0, len(ref), n)]


def gen_insert(
    canary: CanarySpec,
    n: int,
    x_insert,
    vocab_size: int,
    seed: int = 0,
) -> FuzzyDupSet:
    """Insert x_insert random tokens between consecutive n-grams.

    x_insert = math.inf returns the n-grams tagged for independent random
    placement in the corpus (scatter mode) instead of full sequences.
    """
    ref = canary.ref
    grams = _grams(ref, n)
    rng = np.random.default_rng(seed)
    params = {"n": n, "x_insert": "inf" if x_insert == math.inf else int(x_insert), "vocab_size": vocab_size}
    gen = {"algo": "insert", "params": params, "seed": seed}
    if x_insert == math.inf:
        scatter = [list(grams) for _ in range(canary.n_dup - 1)]
        return FuzzyDupSet(canary=canary, dups=[ref], generator=gen, scatter_grams=scatter)
    x_insert = int(x_insert)
    if x_insert < 0:
        raise ValueError("x_insert must be >= 0")
    dups = [ref]
    for _ in range(canary.n_dup - 1):
        parts = []
        for gi, g in enumerate(grams):
            parts.extend(g)
            if gi < len(grams) - 1:
                parts.extend(int(t) for t in rng.integers(vocab_size, size=x_insert))
        dups.append(tuple(parts))
    return FuzzyDupSet(canary=canary, dups=dups, generator=gen)


def gen_shuffle(
    canary: CanarySpec,
    n: int,
    target_tau: float,
    tolerance: float = 0.02,
    seed: int = 0,
    max_attempts: int = 100000,
) -> FuzzyDupSet:
    """Permute n-grams until the induced position permutation hits target tau.

    Rejection-samples gram permutations; raises RuntimeError when the
    target tau is unreachable within max_attempts.
    """
    ref = canary.ref
    L = len(ref)
    if L % n != 0:
        raise ValueError(f"gram size {n} must divide sequence length {L}")
    C = L // n
    rng = np.random.default_rng(seed)
    dups = [ref]
    taus = [0.0]
    for _ in range(canary.n_dup - 1):
        found = False
        for _attempt in range(max_attempts):
            gram_perm = rng.permutation(C)
            pos_perm = [0] * L
            for new_idx, old_idx in enumerate(gram_perm):
                for off in range(n):
                    pos_perm[old_idx * n + off] = new_idx * n + off
            tau = kendall_tau(pos_perm)
            if abs(tau - target_tau) <= tolerance:
                dup = tuple(t for gi in gram_perm for t in ref[gi * n : gi * n + n])
                dups.append(dup)
                taus.append(tau)
                found = True
                break
        if not found:
            raise RuntimeError(
                f"could not reach tau={target_tau} +/- {tolerance} for n={n} "
                f"within {max_attempts} attempts"
            )
    return FuzzyDupSet(
        canary=canary,
        dups=dups,
        generator={
            "algo": "shuffle",
            "params": {"n": n, "target_tau": target_tau, "tolerance": tolerance},
            "seed": seed,
        },
        achieved_tau=taus,
    )


REMOVE_MODES = ("prefix", "suffix", "random_even")


def gen_remove(
    canary: CanarySpec, R: int, mode: str, seed: int = 0
) -> FuzzyDupSet:
    """Remove R tokens (prefix, suffix, or one per equal segment)."""
    ref = canary.ref
    L = len(ref)
    if R >= L:
        raise ValueError(f"R={R} must be < sequence length {L}")
    if mode not in REMOVE_MODES:
        raise ValueError(f"unknown remove mode {mode!r}")
    rng = np.random.default_rng(seed)
    if mode == "suffix":
        cut = ref[: L - R]
    elif mode == "prefix":
        cut = ref[R:]
    else:
        if R == 0:
            cut = ref
        else:
            positions = set(select_positions(L, R, "evenly_consistent", 2, rng)[0])
            cut = tuple(t for i, t in enumerate(ref) if i not in positions)
    dups = [ref] + [cut] * (canary.n_dup - 1)
    return FuzzyDupSet(
        canary=canary,
        dups=dups,
        generator={"algo": "remove", "params": {"R": R, "mode": mode}, "seed": seed},
    )


def inject_into_corpus(corpus: Corpus, sets: Sequence[FuzzyDupSet], seed: int = 0) -> Corpus:
    """Insert member canary sets into a copy of the corpus, seeded-random.

    All duplicates of a member canary land at random token offsets in one
    randomly chosen document; scatter grams are placed independently at
    uniform offsets corpus-wide. Non-member sets are skipped entirely.
    """
    if corpus.num_docs == 0:
        raise ValueError("corpus is empty")
    rng = np.random.default_rng(seed)
    docs = [list(int(t) for t in d) for d in corpus.docs]
    for dupset in sets:
        if not dupset.canary.member:
            continue
        di = int(rng.integers(len(docs)))
        for dup in dupset.dups:
            doc = docs[di]
            off = int(rng.integers(len(doc) + 1))
            docs[di] = doc[:off] + [int(t) for t in dup] + doc[off:]
        if dupset.scatter_grams:
            for gram_list in dupset.scatter_grams:
                for gram in gram_list:
                    gi = int(rng.integers(len(docs)))
                    doc = docs[gi]
                    off = int(rng.integers(len(doc) + 1))
                    docs[gi] = doc[:off] + [int(t) for t in gram] + doc[off:]
    return Corpus(
        docs=tuple(np.asarray(d, dtype=np.uint32) for d in docs),
        vocab_size=corpus.vocab_size,
        doc_ids=corpus.doc_ids,
    )


def load_canaries(path) -> list:
    """Read canaries from JSONL: {id, tokens, member?, n_dup?, ...}."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                CanarySpec(
                    ref=tuple(obj["tokens"]),
                    id=str(obj.get("id", lineno - 1)),
                    n_dup=int(obj.get("n_dup", DEFAULT_N_DUP)),
                    member=bool(obj.get("member", True)),
                    metadata={
                        k: v
                        for k, v in obj.items()
                        if k not in {"id", "tokens", "n_dup", "member"}
                    },
                )
            )
    return out


def save_dupsets(sets: Sequence[FuzzyDupSet], path) -> None:
    """Write duplicate JSONL: one line per duplicate with provenance."""
    with open(path, "w", encoding="utf-8") as fh:
        for dupset in sets:
            for j, dup in enumerate(dupset.dups):
                obj = {
                    "canary_id": dupset.canary.id,
                    "dup_index": j,
                    "tokens": [int(t) for t in dup],
                    "generator": dupset.generator,
                    "member": dupset.canary.member,
                }
                if dupset.achieved_tau is not None:
                    obj["achieved_tau"] = dupset.achieved_tau[j]
                fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
            if dupset.scatter_grams:
                for j, gram_list in enumerate(dupset.scatter_grams, start=1):
                    obj = {
                        "canary_id": dupset.canary.id,
                        "dup_index": j,
                        "scatter_grams": [[int(t) for t in g] for g in gram_list],
                        "generator": dupset.generator,
                        "member": dupset.canary.member,
                    }
                    fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def load_dupsets(path) -> list:
    """Rebuild FuzzyDupSets from duplicate JSONL (grouped by canary_id)."""
    groups: dict = {}
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            cid = obj["canary_id"]
            if cid not in groups:
                groups[cid] = []
                order.append(cid)
            groups[cid].append(obj)
    sets = []
    for cid in order:
        rows = sorted(groups[cid], key=lambda r: r["dup_index"])
        seq_rows = [r for r in rows if "tokens" in r]
        scatter_rows = [r for r in rows if "scatter_grams" in r]
        ref = tuple(seq_rows[0]["tokens"])
        n_dup = len(seq_rows) + len(scatter_rows)
        canary = CanarySpec(
            ref=ref,
            id=cid,
            n_dup=n_dup,
            member=bool(rows[0].get("member", True)),
        )
        taus = None
        if any("achieved_tau" in r for r in seq_rows):
            taus = [float(r.get("achieved_tau", 0.0)) for r in seq_rows]
        sets.append(
            FuzzyDupSet(
                canary=canary,
                dups=[tuple(r["tokens"]) for r in seq_rows],
                generator=rows[0]["generator"],
                achieved_tau=taus,
                scatter_grams=[
                    [tuple(g) for g in r["scatter_grams"]] for r in scatter_rows
                ]
                or None,
            )
        )
    return sets
