"""Text-to-vector providers.

The pipeline's native embedder is a deterministic character-n-gram hashing
projection: robust to the slang, typos and emoticons of social-media text,
dependency-free, and interchangeable (same default dimensionality) with
externally trained 500-d vectors loaded from a TSV file.  It is a stated
stand-in, not a learned representation.
"""
from __future__ import annotations

import hashlib
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

DEFAULT_DIM = 500


class VectorFormatError(ValueError):
    """Precomputed-vector file rows disagree on dimensionality."""


class VectorLookupMiss(KeyError):
    """Requested tweet id is absent from the provider."""


@lru_cache(maxsize=1 << 20)
def _gram_slot(gram: str, d: int, seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(
        gram.encode("utf-8"), digest_size=9, key=str(seed).encode(),
    ).digest()
    index = int.from_bytes(digest[:8], "big") % d
    sign = 1.0 if digest[8] & 1 else -1.0
    return index, sign


def embed_char_ngram(
    text: str,
    d: int = DEFAULT_DIM,
    n_min: int = 1,
    n_max: int = 3,
    seed: int = 0,
) -> np.ndarray:
    """Signed-hash accumulation of all character n-grams, L2-normalized.

    Empty text embeds to the zero vector; any other input has unit norm.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    vec = np.zeros(d, dtype=np.float64)
    lowered = text.lower()
    length = len(lowered)
    for n in range(n_min, n_max + 1):
        for start in range(length - n + 1):
            index, sign = _gram_slot(lowered[start:start + n], d, seed)
            vec[index] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


class PrecomputedProvider:
    """Mapping from tweet id to a stored embedding vector."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self._vectors = vectors
        self.dimension = dimension

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self._vectors

    def ids(self) -> list[str]:
        return list(self._vectors)

    def vector(self, tweet_id: str) -> np.ndarray:
        try:
            return self._vectors[tweet_id]
        except KeyError:
            raise VectorLookupMiss(tweet_id) from None


def load_precomputed(path: str | Path) -> PrecomputedProvider:
    """Read ``tweet_id<TAB>f1,f2,...,fd`` rows with strict dimension checks."""
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                tweet_id, payload = line.split("\t", 1)
                values = np.array([float(v) for v in payload.split(",")], dtype=np.float64)
            except ValueError as e:
                raise VectorFormatError(f"{path}:{lineno}: {e}") from e
            if dimension is None:
                dimension = values.size
            elif values.size != dimension:
                raise VectorFormatError(
                    f"{path}:{lineno}: dimension {values.size} != {dimension}"
                )
            vectors[tweet_id] = values
    return PrecomputedProvider(vectors, dimension if dimension is not None else 0)


def write_vectors(rows: Iterable[tuple[str, np.ndarray]], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for tweet_id, vec in rows:
            fh.write(tweet_id)
            fh.write("\t")
            fh.write(",".join(repr(float(v)) for v in vec))
            fh.write("\n")
            n += 1
    return n
