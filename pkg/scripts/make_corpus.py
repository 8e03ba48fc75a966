#!/usr/bin/env python3
"""Generate a demo corpus: event log, stats, toy embeddings, engagement log,
index snapshot, and a ready-to-serve config.

The corpus plants duplicate groups (token reorderings and extensions of one
intent) next to unrelated filler queries, so control mode visibly surfaces
near-duplicates and dedup/mmr modes visibly suppress them.

Note the toy trigram embedder produces lower cosines than a production
sentence encoder; the emitted config uses a matching threshold (~0.45).

Usage:
    python scripts/make_corpus.py --out demo_corpus [--fillers 200] [--days 30]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from typeahead.completion import build_index, normalize
from typeahead.embeddings import encode_payload, quantize
from typeahead.ingestion import aggregate_events, parse_event_log, toy_embed
from typeahead.scoring import Weights, dump_stats_file, score_all

DUPLICATE_GROUPS = [
    ["kids medicine", "kids meds", "medicine for kids", "kids medicines"],
    ["running shoes", "shoes for running", "running shoes for men"],
    ["birthday cake", "cake for birthday", "birthday cakes"],
    ["laundry detergent", "detergent for laundry"],
    ["dog food", "food for dogs", "dog foods"],
]

SINGLETONS = [
    "kids medical kit", "kids toys", "garden hose", "coffee maker",
    "desk lamp", "yoga mat", "water bottle", "phone charger",
    "notebook paper", "winter gloves",
]

VOCAB = [
    "organic", "wireless", "portable", "kitchen", "outdoor", "storage",
    "cotton", "travel", "electric", "mini", "bathroom", "ceramic", "steel",
    "bamboo", "glass", "folding", "cleaner", "holder", "rack", "set",
    "basket", "mat", "cover", "stand", "box", "bag", "light", "shelf",
]

DEMO_TAU = 0.45
DEMO_WEIGHTS = Weights(1.0, 0.1, 0.01)


def build_queries(n_fillers: int, rng: random.Random) -> list[str]:
    queries = [q for group in DUPLICATE_GROUPS for q in group] + list(SINGLETONS)
    seen = set(queries)
    while len(queries) < len(seen) + 0 or n_fillers > 0:
        q = normalize(" ".join(rng.choices(VOCAB, k=rng.randint(2, 3))))
        if q not in seen:
            seen.add(q)
            queries.append(q)
            n_fillers -= 1
        if n_fillers <= 0:
            break
    return queries


def synth_events(queries: list[str], days: int, rng: random.Random) -> list[str]:
    """Zipf-ish engagement volumes; duplicate-group members split one intent's
    traffic, which is exactly what makes them co-rank in real logs."""
    lines = []
    for rank, q in enumerate(queries):
        weight = 1.0 / (1 + rank * 0.15)
        impressions = max(3, int(400 * weight * rng.uniform(0.7, 1.3)))
        clicks = max(1, int(impressions * rng.uniform(0.2, 0.4)))
        atc = max(0, int(clicks * rng.uniform(0.2, 0.5)))
        for kind, count in (("impression", impressions), ("click", clicks), ("atc", atc)):
            for _ in range(count):
                lines.append(f"{rng.randrange(days)}\t{q}\t{kind}")
    rng.shuffle(lines)
    return lines


def synth_engagements(queries: list[str], rng: random.Random, n_events: int = 400) -> list[str]:
    """Prefix-engagement pairs biased toward popular queries and their
    duplicate variants (aggregate-level duplicate engagement)."""
    lines = []
    weighted = [(q, 1.0 / (1 + i * 0.2)) for i, q in enumerate(queries)]
    total = sum(w for _, w in weighted)
    for _ in range(n_events):
        pick = rng.uniform(0, total)
        for q, w in weighted:
            pick -= w
            if pick <= 0:
                break
        # short prefixes keep candidate pools deep enough for demotion to bite
        cut = rng.randint(3, min(6, max(3, len(q) - 1)))
        lines.append(f"{q[:cut]}\t{q}")
    return lines


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--fillers", type=int, default=200)
    parser.add_argument("--days", type=int, default=30)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    queries = build_queries(args.fillers, rng)
    event_lines = synth_events(queries, args.days, rng)
    (out / "events.tsv").write_text("\n".join(event_lines) + "\n")

    report = parse_event_log(event_lines)
    stats = aggregate_events(report.events, (0, args.days - 1))
    (out / "stats.tsv").write_text(dump_stats_file(stats))

    (out / "embeddings.tsv").write_text(
        "".join(
            f"{q}\t{encode_payload(quantize(toy_embed(q, args.dim)))}\n" for q in queries
        )
    )

    scored = score_all(stats, DEMO_WEIGHTS)
    index = build_index(scored, k=50)
    index.save(str(out / "index.bin"))

    (out / "engagements.tsv").write_text("\n".join(synth_engagements(queries, rng)) + "\n")

    config = {
        "index": str(out / "index.bin"),
        "embeddings": str(out / "embeddings.tsv"),
        "dedup": {
            "similarity_threshold": DEMO_TAU,
            "demote_rank": 20,
            "pool_size": 50,
            "anchor_policy": "all",
        },
        "visible_k": 10,
        "default_mode": "control",
        "listen": "127.0.0.1:8080",
    }
    (out / "service.json").write_text(json.dumps(config, indent=2) + "\n")

    print(f"corpus: {len(queries)} queries, {len(event_lines)} events -> {out}/")
    print(f"serve it:  typeahead serve --config {out}/service.json")
    print(f"try:       typeahead suggest --index {out}/index.bin "
          f"--embeddings {out}/embeddings.tsv --prefix 'kids med' "
          f"--mode dedup --tau {DEMO_TAU} --policy all")


if __name__ == "__main__":
    main()
