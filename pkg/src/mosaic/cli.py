"""Command-line front door wiring the toolkit pipelines together."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .canarygen import (
    CanarySpec,
    ExternalTopKProvider,
    ReplaceConfig,
    UniformVocabProvider,
    gen_insert,
    gen_remove,
    gen_replace,
    gen_shuffle,
    inject_into_corpus,
    load_canaries,
    load_dupsets,
    save_dupsets,
)
from .corpus import Corpus, load_corpus, save_corpus, iter_windows, unique_token_count
from .dedupsim import DedupPolicy, dedup_sweep
from .distances import ngram_overlap_count
from .dupfinder import (
    RepetitionBucket,
    SuffixIndex,
    build_suffix_index,
    count_window_repetitions,
    select_bucket_targets,
)
from .fuzzyscan import ScanConfig, scan_fuzzy_duplicates
from .memmetrics import compute_rho, load_calibration, load_score_records
from .report import ReportBundle, emit, load_bundle

logger = logging.getLogger("mosaic")


def _fmt6(v: float) -> float:
    return float(format(float(v), ".6g"))


def _corpus_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if str(path).endswith((".jsonl", ".json")) else "binary"


def _default_threads() -> int:
    env = os.environ.get("MOSAIC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_build_index(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args.corpus, args.corpus_format))
    index = build_suffix_index(corpus, args.window, corpus_ref=str(args.corpus))
    index.save(args.out)
    logger.info("wrote suffix index (%d positions) to %s", len(index.sa), args.out)
    return 0


def cmd_find_exact(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args.corpus, args.corpus_format))
    index = build_suffix_index(corpus, args.window, corpus_ref=str(args.corpus))
    counts = count_window_repetitions(index)
    rows = sorted(
        ((list(w), c) for w, c in counts.items() if c >= args.min_count),
        key=lambda r: (-r[1], r[0]),
    )
    payload = {
        "window_length": args.window,
        "windows": [{"tokens": w, "count": c} for w, c in rows],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    logger.info("found %d windows with count >= %d", len(rows), args.min_count)
    return 0


def cmd_select_targets(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args.corpus, args.corpus_format))
    index = build_suffix_index(corpus, args.window, corpus_ref=str(args.corpus))
    counts = count_window_repetitions(index)
    bucket = RepetitionBucket(args.bucket, args.tolerance)
    sample = [w for _, w in iter_windows(corpus, args.window, args.sample_step)]
    targets = select_bucket_targets(
        counts,
        bucket,
        args.sample_size,
        args.min_unique,
        args.seed,
        corpus_sample=sample,
        percentile=args.percentile,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for i, t in enumerate(targets):
            fh.write(
                json.dumps({"id": f"target-{i}", "tokens": list(t)}, separators=(",", ":"))
                + "\n"
            )
    logger.info("selected %d targets from bucket %d +/- %g", len(targets), args.bucket, args.tolerance)
    return 0


def _load_targets(path):
    ids, seqs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            ids.append(str(obj.get("id", lineno)))
            seqs.append(obj["tokens"])
    return ids, seqs


def cmd_scan_fuzzy(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args.corpus, args.corpus_format))
    ids, seqs = _load_targets(args.targets)
    config = ScanConfig(
        window_length=args.window,
        step=args.step,
        max_distance=args.max_distance,
        sample_fraction=args.sample,
        seed=args.seed,
        shuffle_docs=args.shuffle_docs,
        threads=args.threads,
    )
    report = scan_fuzzy_duplicates(corpus, seqs, config, target_ids=ids)
    payload = {
        "fraction_scanned": _fmt6(report.fraction_scanned),
        "tokens_scanned": report.tokens_scanned,
        "window_length": args.window,
        "max_distance": args.max_distance,
        "seed": args.seed,
        "targets": [
            {
                "target_id": tr.target_id,
                "raw_counts": tr.raw_counts,
                "cumulative": tr.cumulative,
                "extrapolated": [_fmt6(v) for v in tr.extrapolated],
                "fraction_scanned": _fmt6(report.fraction_scanned),
                "tokens_scanned": report.tokens_scanned,
                "target_tokens": [int(t) for t in seq],
                "matches": [
                    {
                        "doc": ref.doc_index,
                        "offset": ref.offset,
                        "distance": dist,
                        "tokens": [int(t) for t in corpus.window(ref)],
                    }
                    for ref, dist in tr.matches
                ],
            }
            for tr, seq in zip(report.targets, seqs)
        ],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    logger.info("scan complete: %d targets, %d tokens", len(ids), report.tokens_scanned)
    return 0


def cmd_simulate_dedup(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        scan = json.load(fh)
    policies = [DedupPolicy(int(n)) for n in args.ngrams.split(",")]
    max_d = scan.get("max_distance")
    agg: dict = {}
    for tr in scan["targets"]:
        target = tr["target_tokens"]
        duplicates = [(tuple(m["tokens"]), int(m["distance"])) for m in tr["matches"]]
        for row in dedup_sweep(target, duplicates, policies, max_distance=max_d):
            key = (row["policy_n"], row["distance"])
            if key not in agg:
                agg[key] = {"surviving_raw": 0, "surviving_cumulative": 0}
            agg[key]["surviving_raw"] += row["surviving_raw"]
            agg[key]["surviving_cumulative"] += row["surviving_cumulative"]
    rows = [
        {
            "policy_n": n,
            "distance": d,
            "surviving_raw": v["surviving_raw"],
            "surviving_cumulative": v["surviving_cumulative"],
        }
        for (n, d), v in sorted(agg.items())
    ]
    bundle = ReportBundle(
        kind="dedup",
        rows=rows,
        metadata={"report": os.path.basename(str(args.report)), "ngrams": args.ngrams},
    )
    emit(bundle, "csv" if str(args.out).endswith(".csv") else "json", args.out)
    return 0


def cmd_gen_fuzzy(args) -> int:
    canaries = load_canaries(args.canaries)
    params = json.loads(args.params) if args.params else {}
    sets = []
    for i, canary in enumerate(canaries):
        seed = args.seed + i
        if args.algo == "replace":
            if params.get("endpoint"):
                provider = ExternalTopKProvider(params["endpoint"])
            else:
                provider = UniformVocabProvider(int(params.get("vocab_size", 50257)))
            config = ReplaceConfig(
                R=int(params["R"]),
                strategy=params.get("strategy", "random_inconsistent"),
                provider=provider,
                k=int(params.get("k", params.get("vocab_size", 50257))),
                seed=seed,
            )
            sets.append(gen_replace(canary, config))
        elif args.algo == "insert":
            x = params["x_insert"]
            x = math.inf if x in ("inf", None) else int(x)
            sets.append(
                gen_insert(canary, int(params["n"]), x, int(params.get("vocab_size", 50257)), seed)
            )
        elif args.algo == "shuffle":
            sets.append(
                gen_shuffle(
                    canary,
                    int(params["n"]),
                    float(params["target_tau"]),
                    float(params.get("tolerance", 0.02)),
                    seed,
                    int(params.get("max_attempts", 100000)),
                )
            )
        elif args.algo == "remove":
            sets.append(gen_remove(canary, int(params["R"]), params.get("mode", "suffix"), seed))
        else:
            raise ValueError(f"unknown algorithm {args.algo!r}")
    save_dupsets(sets, args.out)
    logger.info("generated %d duplicate sets with %s", len(sets), args.algo)
    return 0


def cmd_inject(args) -> int:
    corpus = load_corpus(args.corpus, _corpus_format(args.corpus, args.corpus_format))
    sets = load_dupsets(args.dups)
    injected = inject_into_corpus(corpus, sets, seed=args.seed)
    save_corpus(injected, args.out, _corpus_format(args.out, args.out_format))
    logger.info(
        "injected %d member sets; corpus grew %d -> %d tokens",
        sum(1 for s in sets if s.canary.member),
        corpus.total_tokens,
        injected.total_tokens,
    )
    return 0


def cmd_compute_rho(args) -> int:
    records = load_score_records(args.scores)
    curve = load_calibration(args.calibration)
    result = compute_rho(records, args.metric, curve, args.n_dup, k_percent=args.k)
    payload = {
        "metric": args.metric,
        "phi_tilde": _fmt6(result.phi_tilde),
        "nu_eq": _fmt6(result.nu_eq),
        "rho": _fmt6(result.rho),
        "n_dup": result.n_dup,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    logger.info("rho=%.4f (nu_eq=%.4f, phi=%.4f)", result.rho, result.nu_eq, result.phi_tilde)
    return 0


def cmd_overlap_table(args) -> int:
    canaries = {c.id: c for c in load_canaries(args.canaries)}
    sets = load_dupsets(args.dups)
    ns = [int(n) for n in args.ngrams.split(",")]
    rows = []
    by_source: dict = {}
    for dupset in sets:
        canary = canaries.get(dupset.canary.id, dupset.canary)
        source = dupset.generator.get("algo", "external")
        for dup in dupset.dups[1:]:
            by_source.setdefault(source, []).append((canary.ref, dup))
    for source in sorted(by_source):
        pairs = by_source[source]
        for n in ns:
            overlaps = [
                ngram_overlap_count(ref, dup, n) for ref, dup in pairs if len(ref) >= n
            ]
            rows.append(
                {
                    "source": source,
                    "n": n,
                    "mean_overlap": _fmt6(float(np.mean(overlaps))) if overlaps else 0.0,
                    "std_overlap": _fmt6(float(np.std(overlaps))) if overlaps else 0.0,
                }
            )
    bundle = ReportBundle(kind="overlap_table", rows=rows, metadata={"ngrams": args.ngrams})
    emit(bundle, "csv" if str(args.out).endswith(".csv") else "json", args.out)
    return 0


def cmd_report(args) -> int:
    bundle = load_bundle(args.input)
    emit(bundle, args.format, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mosaic", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_arg(sp):
        sp.add_argument("--corpus", required=True)
        sp.add_argument("--corpus-format", choices=["binary", "jsonl"], default=None)

    sp = sub.add_parser("build-index", help="build and persist a suffix index")
    corpus_arg(sp)
    sp.add_argument("--window", type=int, default=100)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_build_index)

    sp = sub.add_parser("find-exact", help="count exactly repeated windows")
    corpus_arg(sp)
    sp.add_argument("--window", type=int, default=100)
    sp.add_argument("--min-count", type=int, default=2)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_find_exact)

    sp = sub.add_parser("select-targets", help="sample scan targets from a repetition bucket")
    corpus_arg(sp)
    sp.add_argument("--window", type=int, default=100)
    sp.add_argument("--bucket", type=int, required=True)
    sp.add_argument("--tolerance", type=float, default=0.01)
    sp.add_argument("--sample-size", type=int, default=100)
    sp.add_argument("--percentile", type=float, default=0.05)
    sp.add_argument("--min-unique", type=int, default=0)
    sp.add_argument("--sample-step", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_select_targets)

    sp = sub.add_parser("scan-fuzzy", help="scan for fuzzy duplicates of target sequences")
    corpus_arg(sp)
    sp.add_argument("--targets", required=True)
    sp.add_argument("--window", type=int, default=100)
    sp.add_argument("--step", type=int, default=1)
    sp.add_argument("--max-distance", type=int, default=50)
    sp.add_argument("--sample", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--shuffle-docs", action="store_true")
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_scan_fuzzy)

    sp = sub.add_parser("simulate-dedup", help="simulate n-gram dedup over scan matches")
    sp.add_argument("--report", required=True)
    sp.add_argument("--ngrams", default="13,20,25,50")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate_dedup)

    sp = sub.add_parser("gen-fuzzy", help="generate fuzzy duplicates of canaries")
    sp.add_argument("--canaries", required=True)
    sp.add_argument("--algo", choices=["replace", "insert", "shuffle", "remove"], required=True)
    sp.add_argument("--params", default="{}")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_fuzzy)

    sp = sub.add_parser("inject", help="inject duplicate sets into a corpus")
    corpus_arg(sp)
    sp.add_argument("--dups", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--out-format", choices=["binary", "jsonl"], default=None)
    sp.set_defaults(func=cmd_inject)

    sp = sub.add_parser("compute-rho", help="compute the exact-duplicate equivalent")
    sp.add_argument("--scores", required=True)
    sp.add_argument("--metric", choices=["loss", "ratio", "mink"], default="loss")
    sp.add_argument("--k", type=float, default=0.20)
    sp.add_argument("--calibration", required=True)
    sp.add_argument("--n-dup", type=int, default=10)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_compute_rho)

    sp = sub.add_parser("overlap-table", help="n-gram overlap table for duplicate sets")
    sp.add_argument("--canaries", required=True)
    sp.add_argument("--dups", required=True)
    sp.add_argument("--ngrams", default="1,2,4")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_overlap_table)

    sp = sub.add_parser("report", help="re-emit a report bundle as csv or json")
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:
        logger.error("%s: %s", args.command, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
