#!/usr/bin/env python3
"""Regenerate the committed end-to-end fixtures and golden outputs.

Runs the full CLI pipeline (gen-fuzzy -> inject -> scan-fuzzy ->
simulate-dedup -> report) on deterministic fixtures. The acceptance suite
replays the same pipeline into a temp directory and compares bytes, so
only rerun this script when an intentional output change is made.
"""

import json
import sys
from pathlib import Path

import numpy as np

from mosaic.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"

VOCAB = 500


def write_fixtures() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240501)
    with open(FIXTURES / "base_corpus.jsonl", "w", encoding="utf-8") as fh:
        for i in range(6):
            tokens = [int(t) for t in rng.integers(VOCAB, size=400)]
            fh.write(json.dumps({"id": f"doc-{i}", "tokens": tokens},
                                separators=(",", ":")) + "\n")
    with open(FIXTURES / "canaries.jsonl", "w", encoding="utf-8") as fh:
        for i in range(2):
            tokens = [int(t) for t in rng.integers(VOCAB, size=50)]
            fh.write(json.dumps({"id": f"canary-{i}", "tokens": tokens,
                                 "n_dup": 4}, separators=(",", ":")) + "\n")


def run_pipeline(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    steps = [
        ["gen-fuzzy",
         "--canaries", str(FIXTURES / "canaries.jsonl"),
         "--algo", "replace",
         "--params", json.dumps({"R": 5, "strategy": "random_consistent",
                                 "vocab_size": VOCAB}),
         "--seed", "11",
         "--out", str(outdir / "dups.jsonl")],
        ["inject",
         "--corpus", str(FIXTURES / "base_corpus.jsonl"),
         "--dups", str(outdir / "dups.jsonl"),
         "--seed", "12",
         "--out", str(outdir / "injected.jsonl"),
         "--out-format", "jsonl"],
        ["scan-fuzzy",
         "--corpus", str(outdir / "injected.jsonl"),
         "--targets", str(FIXTURES / "canaries.jsonl"),
         "--window", "50",
         "--max-distance", "25",
         "--sample", "1.0",
         "--seed", "0",
         "--threads", "1",
         "--out", str(outdir / "scan.json")],
        ["simulate-dedup",
         "--report", str(outdir / "scan.json"),
         "--ngrams", "13,20,25,50",
         "--out", str(outdir / "dedup.json")],
        ["report",
         "--input", str(outdir / "dedup.json"),
         "--format", "csv",
         "--out", str(outdir / "dedup.csv")],
    ]
    for step in steps:
        rc = main(step)
        if rc != 0:
            raise SystemExit(f"step {step[0]} failed with exit code {rc}")


if __name__ == "__main__":
    write_fixtures()
    run_pipeline(GOLDEN)
    print(f"fixtures in {FIXTURES}")
    print(f"golden outputs in {GOLDEN}")
    sys.exit(0)
