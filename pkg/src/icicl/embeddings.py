"""Example-text embeddings: a deterministic local default plus a remote provider."""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from .errors import BackendRejected, BackendUnavailable, DimensionMismatch

ENV_EMBED_ENDPOINT = "ICICL_EMBED_ENDPOINT"

TRIGRAM_DIMENSION = 256


@dataclass(frozen=True)
class EmbeddingVector:
    components: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.components)


def _normalize(values: Sequence[float]) -> tuple[float, ...]:
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return tuple(v / norm for v in values)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of unit vectors, clamped to [-1, 1]; equal vectors are exactly 1."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} vs {b.dimension}")
    if a.components == b.components:
        return 1.0
    dot = sum(x * y for x, y in zip(a.components, b.components))
    return max(-1.0, min(1.0, dot))


class EmbeddingProvider(Protocol):
    provider_id: str
    is_deterministic: bool

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class TrigramEmbedder:
    """Hashed character-trigram term frequencies, L2-normalized.

    Fully deterministic and offline: each trigram is bucketed by its sha256
    into a fixed 256-dimensional space. Texts shorter than three characters
    hash as a single gram.
    """

    is_deterministic = True

    def __init__(self, dimension: int = TRIGRAM_DIMENSION):
        self.dimension = dimension
        self.provider_id = f"trigram-{dimension}"

    def _bucket(self, gram: str) -> int:
        digest = hashlib.sha256(gram.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "big") % self.dimension

    def embed_one(self, text: str) -> EmbeddingVector:
        grams = [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
        counts = [0.0] * self.dimension
        for gram in grams:
            counts[self._bucket(gram)] += 1.0
        return EmbeddingVector(components=_normalize(counts))

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed_one(t) for t in texts]


class RemoteEmbedder:
    """POST {texts: [...]} -> {vectors: [[...]]} against a configured endpoint.

    Responses are re-normalized client-side so downstream cosine math can rely
    on unit vectors; ragged responses raise DimensionMismatch.
    """

    is_deterministic = False

    def __init__(self, endpoint: str | None = None, timeout_s: float = 30.0):
        endpoint = endpoint or os.environ.get(ENV_EMBED_ENDPOINT)
        if not endpoint:
            raise BackendUnavailable(f"no embedding endpoint; set {ENV_EMBED_ENDPOINT}")
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.provider_id = "remote"
        self.dimension = 0  # learned from the first response
        self._session = requests.Session()

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            return []
        try:
            resp = self._session.post(self.endpoint, json={"texts": list(texts)}, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise BackendUnavailable(f"embedding endpoint unreachable: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise BackendRejected(resp.status_code, resp.text)
        try:
            vectors = resp.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise BackendRejected(resp.status_code, f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise DimensionMismatch(f"asked for {len(texts)} vectors, got {len(vectors)}")
        out = [EmbeddingVector(components=_normalize([float(x) for x in vec])) for vec in vectors]
        width = out[0].dimension
        for vec in out:
            if vec.dimension != width:
                raise DimensionMismatch(f"ragged response: {vec.dimension} vs {width}")
        self.dimension = width
        return out
