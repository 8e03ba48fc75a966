"""Query autocomplete with runtime de-boosting of semantically duplicate suggestions."""

from .completion import CompletionIndex, build_index, match_prefix, normalize
from .dedup import DedupConfig, cluster_greedy, dedup_index, demote, is_similar, mmr_rerank
from .embeddings import (
    EmbeddingTable,
    QuantizedEmbedding,
    cosine,
    decode_payload,
    encode_payload,
    quantize,
)
from .evaluation import EngagementEvent, EvalReport, mrr, null_rate
from .ingestion import aggregate_events, load_embedding_file, parse_event_log, toy_embed
from .ranking import RankedEntry, RankedList
from .scoring import ScoredQuery, Weights, fit_weights, score
from .service import ServiceConfig, SuggestEngine, SuggestResponse

__version__ = "0.1.0"

__all__ = [
    "CompletionIndex",
    "DedupConfig",
    "EmbeddingTable",
    "EngagementEvent",
    "EvalReport",
    "QuantizedEmbedding",
    "RankedEntry",
    "RankedList",
    "ScoredQuery",
    "ServiceConfig",
    "SuggestEngine",
    "SuggestResponse",
    "Weights",
    "aggregate_events",
    "build_index",
    "cluster_greedy",
    "cosine",
    "decode_payload",
    "dedup_index",
    "demote",
    "encode_payload",
    "fit_weights",
    "is_similar",
    "load_embedding_file",
    "match_prefix",
    "mmr_rerank",
    "mrr",
    "normalize",
    "null_rate",
    "parse_event_log",
    "quantize",
    "score",
    "toy_embed",
]
