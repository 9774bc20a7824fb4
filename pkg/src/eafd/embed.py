"""Deterministic text embedding for the retrieval index.

The reference embedder is signed token hashing: every token hashes (stable
across processes and platforms) to one of ``dimension`` buckets with a +/-1
sign, counts accumulate, and the result is L2-normalized. No model, no
randomness beyond the optional seed that re-keys the hash. A semantic encoder
can replace it behind the same interface.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np

from .errors import EmbedderFailure
from .text import tokenize

DEFAULT_DIMENSION = 512
_NORM_TOLERANCE = 1e-9


class EmbeddingVector:
    """Fixed-length unit vector (float64 in memory; float32 rows on disk)."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1:
            raise EmbedderFailure("embedding must be a 1-d vector")
        norm = float(np.linalg.norm(values))
        if abs(norm - 1.0) > _NORM_TOLERANCE:
            raise EmbedderFailure(f"embedding norm {norm!r} is not 1 within {_NORM_TOLERANCE}")
        self.values = values
        self.values.setflags(write=False)

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, EmbeddingVector) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dimension})"


class EmbedderInterface(Protocol):
    dimension: int

    def embed(self, text: str) -> EmbeddingVector: ...


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dimension != b.dimension:
        raise EmbedderFailure(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return float(np.dot(a.values, b.values))


class HashEmbedder:
    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = 0):
        if dimension < 1:
            raise EmbedderFailure("dimension must be >= 1")
        self.dimension = dimension
        self.seed = seed

    def _bucket(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(f"{self.seed}:{token}".encode("utf-8"),
                                 digest_size=8).digest()
        h = int.from_bytes(digest, "little")
        return h % self.dimension, 1.0 if (h >> 63) & 1 == 0 else -1.0

    def embed(self, text: str) -> EmbeddingVector:
        tokens = tokenize(text)
        if not tokens:
            raise EmbedderFailure("cannot embed text with no tokens")
        counts = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            bucket, sign = self._bucket(token)
            counts[bucket] += sign
        norm = float(np.linalg.norm(counts))
        if norm == 0.0:
            raise EmbedderFailure("signed token counts cancelled to the zero vector")
        return EmbeddingVector(counts / norm)
