"""Semantic de-duplication: offline singleton reduction and runtime de-boosting.

Two deployment shapes around one similarity predicate (cosine >= threshold):

* `dedup_index` removes duplicates from the candidate set ahead of time by
  greedy leader clustering, keeping only the highest-scoring member of each
  cluster. Cheap, but prefixes of removed variants then match nothing.
* `demote` keeps every query indexed and reorders at request time: scanning
  a ranked pool, entries similar to an already-retained anchor are pushed to
  a low rank (default 20) instead of being dropped, so the output is always
  a permutation of the input.

The anchor policy controls the runtime cost/recall trade-off: ALL compares
against every retained entry (O(n^2), the reference behavior), FIRST only
against the rank-1 entry (O(n)), WINDOW(w) against the last w retained.

Similarity is deliberately not transitive: A~B and B~C do not imply A~C, so
clustering is resolved greedily in score order rather than by closure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .embeddings import EmbeddingTable, QuantizedEmbedding, cosine
from .ranking import RankedEntry, RankedList
from .scoring import ScoredQuery

ANCHOR_POLICIES = ("all", "first", "window")

DEFAULT_SIMILARITY_THRESHOLD = 0.92
DEFAULT_DEMOTE_RANK = 20
DEFAULT_POOL_SIZE = 50


@dataclass(frozen=True)
class DedupConfig:
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    demote_rank: int = DEFAULT_DEMOTE_RANK
    pool_size: int = DEFAULT_POOL_SIZE
    anchor_policy: str = "first"
    anchor_window: int = 1
    mmr_lambda: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in (0, 1]")
        if self.demote_rank < 2:
            # rank 1 is always retained; demoting *to* rank 1 is contradictory
            raise ValueError("demote_rank must be >= 2")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.anchor_policy not in ANCHOR_POLICIES:
            raise ValueError(f"anchor_policy must be one of {ANCHOR_POLICIES}")
        if self.anchor_policy == "window" and self.anchor_window < 1:
            raise ValueError("anchor_window must be >= 1")
        if not 0.0 <= self.mmr_lambda <= 1.0:
            raise ValueError("mmr_lambda must be in [0, 1]")


@dataclass(frozen=True)
class SimilarCluster:
    """A disjoint group of mutually attracted queries; the leader joined first."""

    leader: str
    members: tuple[str, ...]  # leader included, in join order


@dataclass
class DemoteStats:
    comparisons: int = 0  # anchor pairs examined, similar or not


def is_similar(a: QuantizedEmbedding, b: QuantizedEmbedding, threshold: float) -> bool:
    return cosine(a, b) >= threshold


def cluster_greedy(
    records: list[ScoredQuery], table: EmbeddingTable, threshold: float
) -> list[SimilarCluster]:
    """Greedy leader clustering in score-descending order (ties lexicographic).

    Each record joins the first existing cluster whose *leader* it is similar
    to, else founds its own cluster. Leaders therefore carry the maximal score
    of their cluster, and records without embeddings stay singletons.
    """
    ordered = sorted(records, key=lambda r: (-r.score, r.query))
    leader_embs: list[QuantizedEmbedding | None] = []
    clusters: list[list[str]] = []
    for rec in ordered:
        emb = table.lookup(rec.query)
        joined = False
        if emb is not None:
            for ci, lemb in enumerate(leader_embs):
                if lemb is not None and is_similar(emb, lemb, threshold):
                    clusters[ci].append(rec.query)
                    joined = True
                    break
        if not joined:
            leader_embs.append(emb)
            clusters.append([rec.query])
    return [SimilarCluster(leader=c[0], members=tuple(c)) for c in clusters]


def dedup_index(
    records: list[ScoredQuery], table: EmbeddingTable, threshold: float
) -> list[ScoredQuery]:
    """Reduce each similar-cluster to its highest-scoring member.

    Returns the cluster leaders in cluster-creation (score-descending) order.
    Score ties resolve to the lexicographically smallest text.
    """
    by_query = {r.query: r for r in records}
    return [by_query[c.leader] for c in cluster_greedy(records, table, threshold)]


def _anchors(retained: list[RankedEntry], cfg: DedupConfig) -> list[RankedEntry]:
    if cfg.anchor_policy == "all":
        return retained
    if cfg.anchor_policy == "first":
        return retained[:1]
    return retained[-cfg.anchor_window:]


def demote_with_stats(
    ranked: RankedList, table: EmbeddingTable, cfg: DedupConfig
) -> tuple[RankedList, DemoteStats]:
    """`demote` plus a counter of anchor comparisons (for cost assertions).

    Policy FIRST examines exactly len-1 anchor pairs; ALL at most the full
    pairwise count (it stops at the first similar anchor).
    """
    if len(ranked) > cfg.pool_size:
        raise ValueError(f"list length {len(ranked)} exceeds pool_size {cfg.pool_size}")
    stats = DemoteStats()
    if len(ranked) <= 1:
        return RankedList([replace(e, demoted=False) for e in ranked]), stats

    entries = list(ranked)
    retained = [replace(entries[0], demoted=False)]
    demoted: list[RankedEntry] = []
    for entry in entries[1:]:
        emb = table.lookup(entry.text)
        found_similar = False
        for anchor in _anchors(retained, cfg):
            stats.comparisons += 1
            if emb is None:
                continue  # no embedding: never demoted, comparison still charged
            anchor_emb = table.lookup(anchor.text)
            if anchor_emb is None:
                continue
            if is_similar(emb, anchor_emb, cfg.similarity_threshold):
                found_similar = True
                break
        if found_similar:
            demoted.append(replace(entry, demoted=True))
        else:
            retained.append(replace(entry, demoted=False))

    cut = min(cfg.demote_rank - 1, len(retained))
    return RankedList(retained[:cut] + demoted + retained[cut:]), stats


def demote(ranked: RankedList, table: EmbeddingTable, cfg: DedupConfig) -> RankedList:
    """Push semantic duplicates of retained entries down to ~cfg.demote_rank.

    Scans in rank order starting at rank 2 with the rank-1 entry always
    retained. The output is a permutation of the input: the retained prefix
    (up to demote_rank - 1 entries), then the demoted block flagged
    demoted=True, then any remaining retained entries. Relative order inside
    each block is preserved.
    """
    return demote_with_stats(ranked, table, cfg)[0]


def mmr_rerank(
    ranked: RankedList, table: EmbeddingTable, lambda_: float, k: int
) -> RankedList:
    """Greedy maximal-marginal-relevance selection of k entries.

    Relevance is the min-max normalized score over the candidate list (all
    equal scores mean relevance 1 everywhere). Selection starts from the
    top-relevance entry and repeatedly takes the candidate maximizing
    lambda*rel - (1-lambda)*max_cosine_to_selected, ties by original rank.
    Output: the k selections in selection order, then the rest in original
    order. Pairs without embeddings contribute similarity 0.
    """
    if not 0.0 <= lambda_ <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    if not 0 <= k <= len(ranked):
        raise ValueError(f"k must be in [0, {len(ranked)}]")
    entries = list(ranked)
    if k == 0 or not entries:
        return RankedList(entries)

    scores = [e.score for e in entries]
    lo, hi = min(scores), max(scores)
    if hi > lo:
        rel = [(s - lo) / (hi - lo) for s in scores]
    else:
        rel = [1.0] * len(scores)
    embs = [table.lookup(e.text) for e in entries]

    def pair_sim(i: int, j: int) -> float:
        if embs[i] is None or embs[j] is None:
            return 0.0
        return cosine(embs[i], embs[j])

    remaining = list(range(len(entries)))
    seed = max(remaining, key=lambda i: (rel[i], -i))
    selected = [seed]
    remaining.remove(seed)
    while len(selected) < k:
        best_i, best_obj = None, None
        for i in remaining:
            obj = lambda_ * rel[i] - (1.0 - lambda_) * max(pair_sim(i, j) for j in selected)
            if best_obj is None or obj > best_obj:
                best_i, best_obj = i, obj
        selected.append(best_i)
        remaining.remove(best_i)
    return RankedList([entries[i] for i in selected] + [entries[i] for i in remaining])
