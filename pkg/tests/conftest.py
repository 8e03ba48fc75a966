"""Shared corpus builders and embedding helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from typeahead.embeddings import EmbeddingTable, QuantizedEmbedding, quantize
from typeahead.ingestion import QueryStats
from typeahead.ranking import RankedEntry, RankedList
from typeahead.scoring import ScoredQuery


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def make_table(vectors: dict[str, np.ndarray]) -> EmbeddingTable:
    return EmbeddingTable({q: quantize(v) for q, v in vectors.items()})


def embedding_from_values(values, scale: float = 1.0) -> QuantizedEmbedding:
    values = np.asarray(values, dtype=np.int8)
    return QuantizedEmbedding(dim=len(values), scale=scale, values=values)


def ranked(texts_scores) -> RankedList:
    return RankedList(
        [RankedEntry(qid=i, text=t, score=s) for i, (t, s) in enumerate(texts_scores)]
    )


def scored(query: str, s: float) -> ScoredQuery:
    return ScoredQuery(query=query, stats=QueryStats(query=query), score=s)


def vectors_with_gram(gram: np.ndarray, dim: int) -> list[np.ndarray]:
    """Unit vectors in `dim` dimensions whose pairwise cosines match `gram`.

    The Gram matrix must be positive definite with unit diagonal; vectors are
    the Cholesky rows padded with zeros.
    """
    gram = np.asarray(gram, dtype=np.float64)
    assert np.allclose(np.diag(gram), 1.0)
    chol = np.linalg.cholesky(gram)
    k = gram.shape[0]
    assert dim >= k
    out = []
    for row in chol:
        v = np.zeros(dim)
        v[:k] = row
        out.append(v)
    return out


def rotate_plane(theta_deg: float, dim: int) -> np.ndarray:
    """Unit vector at angle theta from e1 in the (e1, e2) plane."""
    t = math.radians(theta_deg)
    v = np.zeros(dim)
    v[0], v[1] = math.cos(t), math.sin(t)
    return v


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


BICYCLE_QUERIES = [
    ("men's bicycle", 5.0),
    ("bicycle for men", 3.0),
    ("adult bicycles male", 2.0),
]


@pytest.fixture
def bicycle_corpus() -> tuple[list[ScoredQuery], EmbeddingTable]:
    """Three mutually similar phrasings of one intent, scores forcing the leader."""
    base = unit(np.array([2.0, -1.0, 0.5, 1.5, 0.0, -0.5, 1.0, 0.25]))
    bumps = [np.zeros(8), np.eye(8)[2] * 0.02, -np.eye(8)[5] * 0.02]
    table = make_table(
        {q: unit(base + d) for (q, _), d in zip(BICYCLE_QUERIES, bumps)}
    )
    return [scored(q, s) for q, s in BICYCLE_QUERIES], table


@pytest.fixture
def kids_corpus() -> tuple[list[ScoredQuery], EmbeddingTable]:
    """The duplicate-laden demo corpus: three near-identical 'kids medicine'
    variants at the top of prefix 'kids', plus dissimilar fillers."""
    dim = 20
    base = np.zeros(dim)
    base[:4] = unit(np.array([3.0, 1.0, -2.0, 0.5]))
    bump = np.zeros(dim)
    bump[:4] = [0.01, -0.02, 0.015, 0.005]
    # dissimilar queries that still match the "kids med" prefix, then fillers
    # matching "kids"; each owns a basis direction
    distinct = [
        "kids medical kit", "kids medieval costume",
        "kids toys", "kids shoes", "kids books", "kids bike", "kids snacks",
        "kids chair", "kids lamp", "kids socks", "kids hat", "kids tent",
        "kids puzzle", "kids paint",
    ]
    vectors = {
        "kids medicine": base,
        "kids meds": unit(base + bump),
        "medicine for kids": unit(base - bump),
    }
    r = np.random.default_rng(11)
    for i, f in enumerate(distinct):
        v = np.zeros(dim)
        v[4 + i] = 1.0
        noise = 0.03 * r.standard_normal(dim)
        noise[4 + i] = 0.0
        vectors[f] = unit(v + noise)
    queries = [
        ("kids medicine", 100.0),
        ("kids meds", 95.0),
        ("medicine for kids", 90.0),
    ] + [(f, 80.0 - i) for i, f in enumerate(distinct)]
    return [scored(q, s) for q, s in queries], make_table(vectors)
