"""Command-line entry points for the offline tooling and the service.

File formats:
  event log:       timestamp TAB query TAB kind
  stats file:      query TAB atc TAB clicks TAB impressions
  embedding file:  query TAB base64payload
  engagement log:  prefix TAB engaged_query
  index snapshot:  versioned binary (build-index output)
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import evaluation, scoring
from .completion import CompletionIndex, build_index, normalize
from .dedup import ANCHOR_POLICIES, DedupConfig, dedup_index
from .embeddings import encode_payload, quantize
from .ingestion import (
    aggregate_events,
    build_embedding_table,
    load_embedding_file,
    parse_event_log,
    toy_embed,
)
from .service import MODES, ServiceConfig, SuggestEngine, serve


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.readlines()


def _add_dedup_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=DedupConfig.similarity_threshold,
                   help="similarity threshold (cosine >= tau means duplicate)")
    p.add_argument("--demote-rank", type=int, default=DedupConfig.demote_rank)
    p.add_argument("--pool-size", type=int, default=DedupConfig.pool_size)
    p.add_argument("--policy", choices=ANCHOR_POLICIES, default=DedupConfig.anchor_policy)
    p.add_argument("--window", type=int, default=DedupConfig.anchor_window)
    p.add_argument("--mmr-lambda", type=float, default=DedupConfig.mmr_lambda)


def _dedup_config(args: argparse.Namespace) -> DedupConfig:
    return DedupConfig(
        similarity_threshold=args.tau,
        demote_rank=args.demote_rank,
        pool_size=args.pool_size,
        anchor_policy=args.policy,
        anchor_window=args.window,
        mmr_lambda=args.mmr_lambda,
    )


def _load_engine(args: argparse.Namespace) -> SuggestEngine:
    index = CompletionIndex.load(args.index)
    report = load_embedding_file(_read_lines(args.embeddings))
    if report.errors:
        print(f"warning: skipped {len(report.errors)} bad embedding lines", file=sys.stderr)
    return SuggestEngine(
        index, build_embedding_table(report.entries), dedup_cfg=_dedup_config(args), visible_k=args.k
    )


def cmd_aggregate(args: argparse.Namespace) -> int:
    report = parse_event_log(_read_lines(args.events), strict=args.strict)
    if report.errors:
        print(f"warning: skipped {len(report.errors)} malformed lines", file=sys.stderr)
    if not report.events:
        print("no events parsed", file=sys.stderr)
        return 1
    days = [ev.timestamp for ev in report.events]
    lo = args.day_lo if args.day_lo is not None else min(days)
    hi = args.day_hi if args.day_hi is not None else max(days)
    stats = aggregate_events(report.events, (lo, hi))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(scoring.dump_stats_file(stats))
    print(f"wrote {len(stats)} query stats to {args.out}", file=sys.stderr)
    return 0


def cmd_fit_weights(args: argparse.Namespace) -> int:
    report = parse_event_log(_read_lines(args.events), strict=args.strict)
    if report.errors:
        print(f"warning: skipped {len(report.errors)} malformed lines", file=sys.stderr)
    w = scoring.fit_weights(report.events, args.history_days, args.target_days)
    print(f"{w.a} {w.b} {w.c}")
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    seen = set()
    lines_out = []
    for line in _read_lines(args.queries):
        line = line.rstrip("\n")
        if not line:
            continue
        query = normalize(line.split("\t")[0])
        if not query or query in seen:
            continue
        seen.add(query)
        payload = encode_payload(quantize(toy_embed(query, args.dim)))
        lines_out.append(f"{query}\t{payload}\n")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.writelines(lines_out)
    print(f"wrote {len(lines_out)} embeddings to {args.out}", file=sys.stderr)
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    stats = scoring.load_stats_file(_read_lines(args.queries))
    scored = scoring.score_all(stats, scoring.parse_weights(args.weights))
    index = build_index(scored, k=args.k)
    index.save(args.out)
    print(f"indexed {len(index)} queries into {args.out}", file=sys.stderr)
    return 0


def cmd_dedup_index(args: argparse.Namespace) -> int:
    stats = scoring.load_stats_file(_read_lines(args.queries))
    scored = scoring.score_all(stats, scoring.parse_weights(args.weights))
    report = load_embedding_file(_read_lines(args.embeddings))
    table = build_embedding_table(report.entries)
    kept = dedup_index(scored, table, args.tau)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(scoring.dump_stats_file([sq.stats for sq in kept]))
    print(
        f"kept {len(kept)} of {len(scored)} queries (tau={args.tau}) in {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_suggest(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    print(json.dumps(engine.suggest(args.prefix, args.k, args.mode).to_dict()))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    engine = _load_engine(args)
    events, errors = evaluation.parse_engagement_log(_read_lines(args.engagements))
    if errors:
        print(f"warning: skipped {len(errors)} malformed lines", file=sys.stderr)
    report = evaluation.evaluate(
        events,
        lambda prefix: engine.suggest_list(prefix, args.k, args.mode),
        engine.table,
        k=args.k,
        similarity_threshold=args.tau,
    )
    print(json.dumps(dataclasses.asdict(report)))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    serve(ServiceConfig.from_file(args.config), ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typeahead",
        description="query autocomplete with runtime de-boosting of semantic duplicates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="aggregate an event log into per-query stats")
    p.add_argument("--events", required=True)
    p.add_argument("--from", dest="day_lo", type=int, default=None, help="window start day")
    p.add_argument("--to", dest="day_hi", type=int, default=None, help="window end day")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_aggregate)

    p = sub.add_parser("fit-weights", help="fit scoring weights from an event log")
    p.add_argument("--events", required=True)
    p.add_argument("--history-days", type=int, default=scoring.DEFAULT_HISTORY_DAYS)
    p.add_argument("--target-days", type=int, default=scoring.DEFAULT_TARGET_DAYS)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fn=cmd_fit_weights)

    p = sub.add_parser("embed", help="toy-embed the queries in a file (first TAB field)")
    p.add_argument("--queries", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("build-index", help="build an index snapshot from a stats file")
    p.add_argument("--queries", required=True, help="stats file (see `aggregate`)")
    p.add_argument("--weights", required=True, help="scoring weights as 'a,b,c'")
    p.add_argument("--k", type=int, default=50, help="postings per trie node")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_index)

    p = sub.add_parser("dedup-index", help="reduce a stats file to cluster leaders")
    p.add_argument("--queries", required=True, help="stats file (see `aggregate`)")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--tau", type=float, default=DedupConfig.similarity_threshold)
    p.add_argument("--weights", required=True, help="scoring weights as 'a,b,c'")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_dedup_index)

    p = sub.add_parser("suggest", help="one-shot suggestion, prints the response JSON")
    p.add_argument("--index", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--prefix", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--mode", choices=MODES, default="control")
    _add_dedup_args(p)
    p.set_defaults(fn=cmd_suggest)

    p = sub.add_parser("eval", help="replay an engagement log, print the report JSON")
    p.add_argument("--engagements", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--mode", choices=MODES, default="control")
    p.add_argument("--k", type=int, default=10)
    _add_dedup_args(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP suggest service")
    p.add_argument("--config", required=True, help="JSON file with ServiceConfig fields")
    p.add_argument("--ui", default=None, help="static dir to mount at /ui (demo frontend)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
