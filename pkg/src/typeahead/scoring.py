"""Behavioral scoring: weighted engagement counts, with weights fit from history.

A query's score is the linear form a*atc + b*clicks + c*impressions (no
intercept). Weights are fit by ordinary least squares over one training row
per query: features aggregated over a trailing history window ending at split
day T, target = atc count in the following target window (T, T+target_days].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .completion import normalize
from .ingestion import QueryStats, RawEvent, aggregate_events

DEFAULT_HISTORY_DAYS = 350  # ~50 weeks
DEFAULT_TARGET_DAYS = 14


class InsufficientSignalError(ValueError):
    """Raised when the normal matrix is singular (features carry no signal)."""


@dataclass(frozen=True)
class Weights:
    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name} is not finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=np.float64)


@dataclass(frozen=True)
class ScoredQuery:
    query: str
    stats: QueryStats
    score: float


def score(stats: QueryStats, w: Weights) -> float:
    return w.a * stats.atc + w.b * stats.clicks + w.c * stats.impressions


def score_all(stats: Iterable[QueryStats], w: Weights) -> list[ScoredQuery]:
    return [ScoredQuery(query=s.query, stats=s, score=score(s, w)) for s in stats]


def fit_weights(
    events: Sequence[RawEvent],
    history_days: int = DEFAULT_HISTORY_DAYS,
    target_days: int = DEFAULT_TARGET_DAYS,
    clamp_nonnegative: bool = False,
) -> Weights:
    """Fit (a, b, c) by OLS on per-query (atc, clicks, impressions) -> future atc.

    The split day T is target_days before the last event day; features come
    from [T - history_days + 1, T], targets from (T, T + target_days]. One row
    per query observed in either window (zero-filled where absent). Negative
    fitted weights are kept unless `clamp_nonnegative` is set.
    """
    if history_days < 1 or target_days < 1:
        raise ValueError("history_days and target_days must be >= 1")
    if not events:
        raise ValueError("no events to fit on")
    days = [ev.timestamp for ev in events]
    span = max(days) - min(days) + 1
    if span < history_days + target_days:
        raise ValueError(
            f"events span {span} days; need >= {history_days + target_days}"
        )
    split = max(days) - target_days
    history = {s.query: s for s in aggregate_events(events, (split - history_days + 1, split))}
    future_atc = {s.query: s.atc for s in aggregate_events(events, (split + 1, split + target_days))}
    queries = sorted(set(history) | set(future_atc))
    zero = QueryStats(query="")
    x = np.array(
        [[history.get(q, zero).atc, history.get(q, zero).clicks, history.get(q, zero).impressions]
         for q in queries],
        dtype=np.float64,
    )
    y = np.array([future_atc.get(q, 0) for q in queries], dtype=np.float64)

    xtx = x.T @ x
    if np.linalg.matrix_rank(xtx) < 3:
        raise InsufficientSignalError("normal matrix is singular; features carry no signal")
    w = np.linalg.solve(xtx, x.T @ y)
    if clamp_nonnegative:
        w = np.maximum(w, 0.0)
    return Weights(a=float(w[0]), b=float(w[1]), c=float(w[2]))


def parse_weights(text: str) -> Weights:
    """Parse the CLI form 'a,b,c'."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 'a,b,c', got {text!r}")
    a, b, c = (float(p) for p in parts)
    return Weights(a=a, b=b, c=c)


def load_stats_file(lines: Iterable[str]) -> list[QueryStats]:
    """Read `query TAB atc TAB clicks TAB impressions` rows."""
    out = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"line {line_no}: expected 4 TAB-separated fields")
        query = normalize(parts[0])
        try:
            atc, clicks, impressions = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: non-numeric count") from exc
        if min(atc, clicks, impressions) < 0:
            raise ValueError(f"line {line_no}: negative count")
        out.append(QueryStats(query=query, atc=atc, clicks=clicks, impressions=impressions))
    return out


def dump_stats_file(stats: Iterable[QueryStats]) -> str:
    return "".join(
        f"{s.query}\t{s.atc}\t{s.clicks}\t{s.impressions}\n" for s in stats
    )
