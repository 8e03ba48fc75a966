"""Matching stage: map a typed prefix to the top-n highest-scoring queries.

Queries are indexed under every rotation of their token sequence, so
"medicine for kids" also matches the prefixes "for kids me..." and
"kids medicine f...". The index is a compressed (radix) trie whose nodes
carry precomputed top-K posting lists, making a lookup O(|prefix| + n)
node visits with no subtree walks at query time.
"""

from __future__ import annotations

import struct
import unicodedata
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .ranking import RankedEntry, RankedList

if TYPE_CHECKING:  # pragma: no cover
    from .scoring import ScoredQuery

DEFAULT_TOP_K = 50

_SNAPSHOT_VERSION = 1
_MAGIC = b"TAIX"


def normalize(text: str) -> str:
    """Lowercase, Unicode-NFC, whitespace runs collapsed, ends stripped. Idempotent."""
    return " ".join(unicodedata.normalize("NFC", text).lower().split())


def rotation_keys(text: str) -> list[str]:
    """All rotations of the token sequence, duplicates removed, original first."""
    tokens = text.split(" ")
    seen = set()
    keys = []
    for i in range(len(tokens)):
        key = " ".join(tokens[i:] + tokens[:i])
        if key not in seen:
            seen.add(key)
            keys.append(key)
    return keys


@dataclass(frozen=True)
class QueryRecord:
    qid: int
    text: str
    score: float


class _Node:
    __slots__ = ("edges", "postings")

    def __init__(self) -> None:
        self.edges: dict[str, tuple[str, _Node]] | None = None
        self.postings: tuple[int, ...] = ()


class CompletionIndex:
    """Immutable prefix index; build once, share across concurrent readers."""

    def __init__(self, records: Sequence[QueryRecord], k: int, root: _Node):
        self.records = tuple(records)
        self.k = k
        self._root = root

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]], k: int = DEFAULT_TOP_K) -> "CompletionIndex":
        """Build from (text, score) pairs; texts must be normalized and unique."""
        if k < 1:
            raise ValueError("k must be >= 1")
        records = [QueryRecord(qid=i, text=t, score=s) for i, (t, s) in enumerate(pairs)]
        seen: dict[str, int] = {}
        duplicates = []
        for r in records:
            if not r.text:
                raise ValueError(f"record {r.qid} has empty text")
            if r.text != normalize(r.text):
                raise ValueError(f"record text not normalized: {r.text!r}")
            if r.text in seen:
                duplicates.append(r.text)
            seen[r.text] = r.qid
        if duplicates:
            raise ValueError(f"duplicate query texts: {sorted(set(duplicates))}")

        # Total order by (-score, text); posting lists store qids in this order.
        order_of = {qid: pos for pos, qid in enumerate(
            sorted((r.qid for r in records), key=lambda q: (-records[q].score, records[q].text))
        )}
        pairs_sorted = sorted(
            (key, r.qid) for r in records for key in rotation_keys(r.text)
        )
        root = _build_node(pairs_sorted, 0, len(pairs_sorted), 0, order_of, k)
        return cls(records, k, root)

    def __len__(self) -> int:
        return len(self.records)

    def _descend(self, prefix: str) -> tuple[_Node | None, int]:
        """Walk the radix trie; returns (node covering prefix, nodes visited)."""
        node = self._root
        visits = 1
        pos = 0
        while pos < len(prefix):
            if node.edges is None:
                return None, visits
            edge = node.edges.get(prefix[pos])
            if edge is None:
                return None, visits
            label, child = edge
            rest = len(prefix) - pos
            if rest <= len(label):
                if label.startswith(prefix[pos:]):
                    return child, visits + 1
                return None, visits
            if not prefix.startswith(label, pos):
                return None, visits
            pos += len(label)
            node = child
            visits += 1
        return node, visits

    def match_with_stats(self, prefix: str, n: int = DEFAULT_TOP_K) -> tuple[RankedList, int]:
        """match() plus the trie-node visit count (for cost assertions)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        n = min(n, self.k)  # per-node postings are truncated at k
        node, visits = self._descend(normalize(prefix))
        if node is None:
            return RankedList([]), visits
        entries = [
            RankedEntry(qid=q, text=self.records[q].text, score=self.records[q].score)
            for q in node.postings[:n]
        ]
        return RankedList(entries), visits

    def match(self, prefix: str, n: int = DEFAULT_TOP_K) -> RankedList:
        """Top-n queries with an indexed key extending `prefix`, score-descending.

        Ties break lexicographically by text; the empty prefix yields the
        global top-n. Results are capped at the index's k.
        """
        return self.match_with_stats(prefix, n)[0]

    def save(self, path: str) -> None:
        """Versioned binary snapshot: records only, trie is rebuilt on load."""
        chunks = [bytes([_SNAPSHOT_VERSION]), _MAGIC, struct.pack("<II", self.k, len(self.records))]
        for r in self.records:
            text = r.text.encode("utf-8")
            chunks.append(struct.pack("<dI", r.score, len(text)))
            chunks.append(text)
        with open(path, "wb") as fh:
            fh.write(b"".join(chunks))

    @classmethod
    def load(cls, path: str) -> "CompletionIndex":
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) < 13 or raw[0] != _SNAPSHOT_VERSION or raw[1:5] != _MAGIC:
            raise ValueError(f"not a version-{_SNAPSHOT_VERSION} index snapshot: {path}")
        k, count = struct.unpack_from("<II", raw, 5)
        pairs = []
        offset = 13
        for _ in range(count):
            score, text_len = struct.unpack_from("<dI", raw, offset)
            offset += 12
            pairs.append((raw[offset : offset + text_len].decode("utf-8"), score))
            offset += text_len
        if offset != len(raw):
            raise ValueError(f"trailing bytes in index snapshot: {path}")
        return cls.from_pairs(pairs, k)


def _build_node(
    pairs: list[tuple[str, int]],
    lo: int,
    hi: int,
    depth: int,
    order_of: dict[int, int],
    k: int,
) -> _Node:
    """Recursively build the radix subtrie over pairs[lo:hi] (sorted, shared prefix len = depth)."""
    node = _Node()
    candidates: set[int] = set()
    i = lo
    while i < hi and len(pairs[i][0]) == depth:
        candidates.add(pairs[i][1])
        i += 1
    edges: dict[str, tuple[str, _Node]] = {}
    while i < hi:
        ch = pairs[i][0][depth]
        j = i + 1
        while j < hi and pairs[j][0][depth] == ch:
            j += 1
        # Sorted range => the group's common prefix is LCP(first, last).
        first, last = pairs[i][0], pairs[j - 1][0]
        end = depth + 1
        limit = min(len(first), len(last))
        while end < limit and first[end] == last[end]:
            end += 1
        child = _build_node(pairs, i, j, end, order_of, k)
        edges[ch] = (first[depth:end], child)
        candidates.update(child.postings)
        i = j
    if edges:
        node.edges = edges
    node.postings = tuple(sorted(candidates, key=order_of.__getitem__)[:k])
    return node


def build_index(records: Iterable["ScoredQuery"], k: int = DEFAULT_TOP_K) -> CompletionIndex:
    """Index scored queries under every token rotation with top-k postings."""
    return CompletionIndex.from_pairs(((r.query, r.score) for r in records), k)


def match_prefix(index: CompletionIndex, prefix: str, n: int = DEFAULT_TOP_K) -> RankedList:
    return index.match(prefix, n)
