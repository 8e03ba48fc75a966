"""Parse query logs and embedding files into the engine's data model.

Wire formats (UTF-8 text, one record per line, single-TAB separated):
  event log:      timestamp TAB query TAB kind     (kind: impression|click|atc)
  embedding file: query TAB base64payload          (payload layout: embeddings module)

Parsing is lenient by default: malformed lines land in the report's error
list and parsing continues. Strict mode aborts on the first malformed line.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .completion import normalize
from .embeddings import EmbeddingTable, PayloadError, decode_payload

EVENT_KINDS = ("impression", "click", "atc")


@dataclass(frozen=True)
class RawEvent:
    timestamp: int  # whole days since epoch
    query: str  # normalized
    kind: str


@dataclass(frozen=True)
class QueryStats:
    query: str
    atc: int = 0
    clicks: int = 0
    impressions: int = 0


@dataclass(frozen=True)
class EmbeddingFileEntry:
    query: str
    payload: str  # base64 text, kept verbatim so re-serialization is byte-exact


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    line: str
    reason: str


class EventLogError(ValueError):
    """Strict-mode parse abort; carries the offending line's issue."""

    def __init__(self, issue: ParseIssue):
        super().__init__(f"line {issue.line_no}: {issue.reason}")
        self.issue = issue


@dataclass
class EventLogReport:
    events: list[RawEvent] = field(default_factory=list)
    errors: list[ParseIssue] = field(default_factory=list)


@dataclass
class EmbeddingFileReport:
    entries: list[EmbeddingFileEntry] = field(default_factory=list)
    errors: list[ParseIssue] = field(default_factory=list)
    duplicates: int = 0


def _parse_event_line(line_no: int, line: str) -> RawEvent | ParseIssue:
    parts = line.split("\t")
    if len(parts) != 3:
        return ParseIssue(line_no, line, f"expected 3 TAB-separated fields, got {len(parts)}")
    ts_text, raw_query, kind = parts
    try:
        ts = int(ts_text)
    except ValueError:
        return ParseIssue(line_no, line, f"non-numeric timestamp {ts_text!r}")
    if ts < 0:
        return ParseIssue(line_no, line, f"negative timestamp {ts}")
    if kind not in EVENT_KINDS:
        return ParseIssue(line_no, line, f"unknown event kind {kind!r}")
    query = normalize(raw_query)
    if not query:
        return ParseIssue(line_no, line, "query empty after normalization")
    return RawEvent(timestamp=ts, query=query, kind=kind)


def parse_event_log(lines: Iterable[str], strict: bool = False) -> EventLogReport:
    """Parse an event log stream; order of well-formed events is preserved."""
    report = EventLogReport()
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parsed = _parse_event_line(line_no, line)
        if isinstance(parsed, ParseIssue):
            if strict:
                raise EventLogError(parsed)
            report.errors.append(parsed)
        else:
            report.events.append(parsed)
    return report


def aggregate_events(events: Iterable[RawEvent], window: tuple[int, int]) -> list[QueryStats]:
    """Per-query engagement counts over the inclusive day window [day_lo, day_hi].

    Queries are re-normalized before merging, so hand-built events that differ
    only by case or whitespace collapse into one record. Output is sorted by
    query text; only queries with at least one in-window event appear.
    """
    day_lo, day_hi = window
    if day_lo > day_hi:
        raise ValueError(f"empty-ordered window: {day_lo} > {day_hi}")
    counts: dict[str, Counter] = {}
    for ev in events:
        if not day_lo <= ev.timestamp <= day_hi:
            continue
        q = normalize(ev.query)
        counts.setdefault(q, Counter())[ev.kind] += 1
    return [
        QueryStats(
            query=q,
            atc=c["atc"],
            clicks=c["click"],
            impressions=c["impression"],
        )
        for q, c in sorted(counts.items())
    ]


def load_embedding_file(lines: Iterable[str], strict: bool = False) -> EmbeddingFileReport:
    """Load `query TAB base64payload` lines; duplicate queries keep the last entry."""
    report = EmbeddingFileReport()
    by_query: dict[str, EmbeddingFileEntry] = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            issue = ParseIssue(line_no, line, f"expected 2 TAB-separated fields, got {len(parts)}")
            if strict:
                raise EventLogError(issue)
            report.errors.append(issue)
            continue
        raw_query, payload = parts
        query = normalize(raw_query)
        if not query:
            issue = ParseIssue(line_no, line, "query empty after normalization")
            if strict:
                raise EventLogError(issue)
            report.errors.append(issue)
            continue
        try:
            decode_payload(payload)
        except PayloadError as exc:
            issue = ParseIssue(line_no, line, f"bad payload: {exc}")
            if strict:
                raise EventLogError(issue) from exc
            report.errors.append(issue)
            continue
        if query in by_query:
            report.duplicates += 1
        by_query[query] = EmbeddingFileEntry(query=query, payload=payload)
    report.entries = list(by_query.values())
    return report


def build_embedding_table(entries: Iterable[EmbeddingFileEntry]) -> EmbeddingTable:
    """Decode loaded payloads into an O(1) lookup table."""
    return EmbeddingTable({e.query: decode_payload(e.payload) for e in entries})


def _trigram_hash(gram: str) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def toy_embed(text: str, dim: int = 64) -> np.ndarray:
    """Deterministic desk-scale embedder: signed character-trigram hashing.

    Each trigram of `text` adds +/-1 to one of `dim` buckets; the result is
    L2-normalized. Texts shorter than 3 characters have no trigrams and map
    to the zero vector. Stands in for a real sentence encoder, whose vectors
    would be ingested from an embedding file instead.
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    v = np.zeros(dim, dtype=np.float64)
    for i in range(len(text) - 2):
        h = _trigram_hash(text[i : i + 3])
        bucket = h % dim
        sign = 1.0 if (h >> 40) & 1 else -1.0
        v[bucket] += sign
    n = np.linalg.norm(v)
    if n > 0:
        v /= n
    return v
