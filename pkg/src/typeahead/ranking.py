"""Ranked suggestion lists shared by the matching, demotion and evaluation stages."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator


@dataclass(frozen=True)
class RankedEntry:
    """One suggestion in a ranked list; rank is implied by list position (1-based)."""

    qid: int
    text: str
    score: float
    demoted: bool = False


@dataclass
class RankedList:
    """Ordered suggestions. Ranks are contiguous from 1; qids are unique."""

    entries: list[RankedEntry]

    def __post_init__(self) -> None:
        qids = [e.qid for e in self.entries]
        if len(set(qids)) != len(qids):
            raise ValueError("ranked list entries must have unique qids")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RankedEntry]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> RankedEntry:
        return self.entries[i]

    def texts(self) -> list[str]:
        return [e.text for e in self.entries]

    def rank_of(self, text: str) -> int | None:
        """1-based rank of `text`, or None when absent."""
        for i, e in enumerate(self.entries):
            if e.text == text:
                return i + 1
        return None

    def top(self, k: int) -> "RankedList":
        return RankedList(self.entries[:k])

    def with_flags_cleared(self) -> "RankedList":
        return RankedList([replace(e, demoted=False) for e in self.entries])
