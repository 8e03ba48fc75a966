"""Offline measurement by log replay: MRR, top-k diversity, null-suggestion rate.

An engagement log line is `prefix TAB engaged_query`. Replay drives any
suggest callable (prefix -> RankedList), so control, demotion and MMR
pipelines are measured through the same harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .completion import normalize
from .embeddings import EmbeddingTable, cosine
from .ingestion import EventLogError, ParseIssue
from .ranking import RankedList

SuggestFn = Callable[[str], RankedList]

DEFAULT_VISIBLE_K = 10


@dataclass(frozen=True)
class EngagementEvent:
    prefix: str
    engaged_query: str  # normalized

    def __post_init__(self) -> None:
        if not self.prefix or not self.engaged_query:
            raise ValueError("prefix and engaged_query must be non-empty")


@dataclass(frozen=True)
class EvalReport:
    mrr: float
    events_total: int
    events_missing: int
    similar_pairs_topk_mean: float
    mean_pairwise_distance_topk: float
    null_rate: float


def parse_engagement_log(lines: Iterable[str], strict: bool = False) -> tuple[list[EngagementEvent], list[ParseIssue]]:
    events: list[EngagementEvent] = []
    errors: list[ParseIssue] = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not normalize(parts[1]):
            issue = ParseIssue(line_no, line, "expected `prefix TAB engaged_query`")
            if strict:
                raise EventLogError(issue)
            errors.append(issue)
            continue
        events.append(EngagementEvent(prefix=parts[0], engaged_query=normalize(parts[1])))
    return events, errors


def mrr(events: Sequence[EngagementEvent], suggest: SuggestFn, k: int = DEFAULT_VISIBLE_K) -> tuple[float, int]:
    """Mean reciprocal rank of the engaged query within the top-k suggestions.

    An engaged query absent from the top-k contributes 0 (and counts as
    missing) rather than being skipped: losing a historically engaged
    suggestion is a real cost, not a no-op.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not events:
        raise ValueError("mean over zero events is undefined")
    contributions = []
    missing = 0
    for ev in events:
        rank = suggest(ev.prefix).top(k).rank_of(ev.engaged_query)
        if rank is None:
            missing += 1
        else:
            contributions.append(1.0 / rank)
    # fsum makes the mean exactly invariant under event-order permutation
    return math.fsum(contributions) / len(events), missing


def similar_pair_count(ranked: RankedList, k: int, table: EmbeddingTable, threshold: float) -> int:
    """Unordered top-k pairs with cosine >= threshold (full pairwise check)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    embs = [table.lookup(e.text) for e in ranked.top(k)]
    return sum(
        1
        for a, b in combinations(embs, 2)
        if a is not None and b is not None and cosine(a, b) >= threshold
    )


def mean_pairwise_distance(ranked: RankedList, k: int, table: EmbeddingTable) -> float:
    """Mean of (1 - cosine) over top-k pairs; needs >= 2 embedded entries."""
    if k < 2:
        raise ValueError("k must be >= 2")
    embs = [e for e in (table.lookup(x.text) for x in ranked.top(k)) if e is not None]
    if len(embs) < 2:
        raise ValueError("fewer than 2 embedded entries in the top-k")
    dists = [1.0 - cosine(a, b) for a, b in combinations(embs, 2)]
    return sum(dists) / len(dists)


def null_rate(prefixes: Sequence[str], suggest: SuggestFn) -> float:
    """Fraction of prefixes that yield zero suggestions."""
    if not prefixes:
        raise ValueError("no prefixes to evaluate")
    return sum(1 for p in prefixes if len(suggest(p)) == 0) / len(prefixes)


def evaluate(
    events: Sequence[EngagementEvent],
    suggest: SuggestFn,
    table: EmbeddingTable,
    k: int = DEFAULT_VISIBLE_K,
    similarity_threshold: float = 0.92,
) -> EvalReport:
    """Full replay over an engagement log; one suggest call per distinct prefix.

    Diversity metrics average over distinct prefixes with a non-empty result;
    the distance mean additionally needs >= 2 embedded entries and reports 0.0
    when no prefix qualifies.
    """
    mrr_value, missing = mrr(events, suggest, k)
    prefixes = list(dict.fromkeys(ev.prefix for ev in events))
    lists = {p: suggest(p) for p in prefixes}

    pair_counts = []
    distances = []
    for p in prefixes:
        ranked = lists[p]
        if len(ranked) >= 2:
            pair_counts.append(similar_pair_count(ranked, k, table, similarity_threshold))
            try:
                distances.append(mean_pairwise_distance(ranked, k, table))
            except ValueError:
                pass
    return EvalReport(
        mrr=mrr_value,
        events_total=len(events),
        events_missing=missing,
        similar_pairs_topk_mean=sum(pair_counts) / len(pair_counts) if pair_counts else 0.0,
        mean_pairwise_distance_topk=sum(distances) / len(distances) if distances else 0.0,
        null_rate=null_rate(prefixes, lambda p: lists[p]),
    )
