"""Quantized query embeddings: int8 storage, base64 codec, fast cosine, O(1) lookup.

Vectors are stored as a per-vector positive scale plus signed 8-bit components
(symmetric max-abs scaling, no zero point). The L2 norm of the dequantized
vector is precomputed so cosine similarity is a single integer dot product.

Payload layout (before base64): 4-byte little-endian unsigned dim,
4-byte little-endian IEEE-754 binary32 scale, then `dim` signed bytes.
"""

from __future__ import annotations

import base64
import binascii
import math
import struct
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

# Dimension of the production sentence-encoder vectors; any dim >= 1 is accepted.
DEFAULT_DIM = 768

_HEADER = struct.Struct("<If")


class PayloadError(ValueError):
    """Raised when an encoded embedding payload cannot be decoded."""


class DimensionMismatchError(ValueError):
    """Raised when two embeddings of different dimension are compared."""


@dataclass(eq=False)
class QuantizedEmbedding:
    """A query vector as signed 8-bit values with one float32 scale.

    `norm` is the L2 norm of the dequantized vector, precomputed at
    construction so similarity needs no per-call square roots over floats.
    The zero vector is represented as scale=1.0, all-zero values, norm 0.
    """

    dim: int
    scale: float
    values: np.ndarray  # int8, shape (dim,)
    norm: float = field(init=False)
    values_norm: float = field(init=False)  # sqrt(sum values^2), scale-free

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.values.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} values, got shape {self.values.shape}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        sq = int(np.dot(self.values.astype(np.int64), self.values.astype(np.int64)))
        self.values_norm = math.sqrt(sq)
        self.norm = self.scale * self.values_norm

    def is_zero(self) -> bool:
        return self.norm == 0.0


def _round_half_away_from_zero(x: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def quantize(v: np.ndarray) -> QuantizedEmbedding:
    """Quantize a float vector to int8 with symmetric per-vector scaling.

    scale = max|v_i| / 127 (1.0 for the all-zero vector), stored at float32
    precision so the base64 codec round-trips exactly. Components round half
    away from zero and clamp to [-127, 127].
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite components")
    maxabs = float(np.max(np.abs(v)))
    if maxabs == 0.0:
        return QuantizedEmbedding(dim=v.size, scale=1.0, values=np.zeros(v.size, dtype=np.int8))
    # float32 is the on-wire precision for scale; quantize against it directly.
    scale = float(np.float32(maxabs / 127.0))
    q = _round_half_away_from_zero(v / scale)
    q = np.clip(q, -127, 127).astype(np.int8)
    return QuantizedEmbedding(dim=v.size, scale=scale, values=q)


def dequantize(q: QuantizedEmbedding) -> np.ndarray:
    return q.scale * q.values.astype(np.float64)


def encode_payload(q: QuantizedEmbedding) -> str:
    """Serialize to standard-alphabet base64 with padding."""
    raw = _HEADER.pack(q.dim, q.scale) + q.values.tobytes()
    return base64.b64encode(raw).decode("ascii")


def decode_payload(text: str) -> QuantizedEmbedding:
    """Decode a base64 payload; the norm is recomputed from the stored values."""
    try:
        raw = base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise PayloadError(f"invalid base64: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise PayloadError(f"payload too short: {len(raw)} bytes")
    dim, scale = _HEADER.unpack_from(raw)
    if dim == 0:
        raise PayloadError("payload dim is 0")
    if len(raw) != _HEADER.size + dim:
        raise PayloadError(f"payload length {len(raw)} != {_HEADER.size + dim} for dim {dim}")
    if not scale > 0:
        raise PayloadError(f"non-positive scale {scale}")
    values = np.frombuffer(raw, dtype=np.int8, offset=_HEADER.size).copy()
    return QuantizedEmbedding(dim=dim, scale=float(scale), values=values)


def cosine(a: QuantizedEmbedding, b: QuantizedEmbedding) -> float:
    """Cosine similarity via the integer-domain dot product, in [-1, 1].

    The per-vector scales cancel out of scale*dot/(norm*norm) exactly, so the
    quotient is computed scale-free: vectors with equal int8 values compare
    bit-identically regardless of their scales. Returns 0.0 when either norm
    is zero (degenerate inputs must not propagate NaNs into ranking).
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim {a.dim} != {b.dim}")
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    dot = int(np.dot(a.values.astype(np.int64), b.values.astype(np.int64)))
    c = dot / (a.values_norm * b.values_norm)
    return min(1.0, max(-1.0, c))


def cosine_float(a: QuantizedEmbedding, b: QuantizedEmbedding) -> float:
    """Cosine computed on dequantized float vectors; alternate path for checks."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim {a.dim} != {b.dim}")
    va, vb = dequantize(a), dequantize(b)
    na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = float(np.dot(va, vb)) / (na * nb)
    return min(1.0, max(-1.0, c))


class EmbeddingTable:
    """Immutable query-text -> embedding lookup table (expected O(1) access)."""

    def __init__(self, entries: Mapping[str, QuantizedEmbedding]):
        self._by_query = dict(entries)

    def __len__(self) -> int:
        return len(self._by_query)

    def __contains__(self, query: str) -> bool:
        return query in self._by_query

    def __iter__(self) -> Iterator[str]:
        return iter(self._by_query)

    def lookup(self, query: str) -> QuantizedEmbedding | None:
        """The embedding for `query`, or None; absence is a normal outcome."""
        return self._by_query.get(query)
