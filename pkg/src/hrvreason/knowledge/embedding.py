"""Embedding interface plus a deterministic offline implementation.

The hashing embedder maps character n-gram counts through a signed feature
hash into a fixed dimension. It is seeded, unit-normalized, and depends on
nothing but the text bytes, so CI retrieval is reproducible byte-for-byte
with no model downloads. Real encoders plug in over HTTP with the same
contract: a batch of texts in, one unit vector per text out.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np

from ..errors import TransportError


class Embedder(Protocol):
    dimension: int

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...

    def fingerprint(self) -> str: ...


class HashingEmbedder:
    """Seeded character n-gram hashing into a unit-normalized vector."""

    def __init__(self, dimension: int = 64, seed: int = 0, ngram: int = 3):
        self.dimension = dimension
        self.seed = seed
        self.ngram = ngram
        self._salt = str(seed).encode()

    def _vector(self, text: str) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=np.float64)
        norm = " ".join(text.lower().split())
        padded = f" {norm} "
        n = self.ngram
        if len(padded) < n:
            padded = padded.ljust(n)
        for i in range(len(padded) - n + 1):
            gram = padded[i : i + n].encode("utf-8")
            h = hashlib.blake2b(gram, digest_size=8, salt=self._salt).digest()
            val = int.from_bytes(h, "little")
            idx = val % self.dimension
            sign = 1.0 if (val >> 63) & 1 else -1.0
            v[idx] += sign
        nrm = np.linalg.norm(v)
        if nrm == 0:
            v[0] = 1.0
            return v
        return v / nrm

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.vstack([self._vector(t) for t in texts]) if texts else np.zeros((0, self.dimension))

    def fingerprint(self) -> str:
        return f"hash:d={self.dimension}:seed={self.seed}:n={self.ngram}"


class HttpEmbedder:
    """Client for an external embedding service.

    POST {"texts": [...]} -> {"vectors": [[...], ...]}; vectors are
    re-normalized defensively since the store assumes unit length.
    """

    def __init__(self, url: str, dimension: int, client=None, timeout_s: float = 60.0):
        import httpx

        self.url = url
        self.dimension = dimension
        self._client = client or httpx.Client(timeout=timeout_s)

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        if not texts:
            return np.zeros((0, self.dimension))
        try:
            resp = self._client.post(self.url, json={"texts": list(texts)})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"embedding service failed: {exc}") from exc
        vecs = np.asarray(resp.json()["vectors"], dtype=np.float64)
        if vecs.shape != (len(texts), self.dimension):
            raise TransportError(
                f"embedding service returned shape {vecs.shape}, "
                f"expected {(len(texts), self.dimension)}"
            )
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return vecs / norms

    def fingerprint(self) -> str:
        return f"http:{self.url}:d={self.dimension}"


def make_embedder(kind: str = "hash", dimension: int = 64, seed: int = 0, url: str = "") -> Embedder:
    if kind == "hash":
        return HashingEmbedder(dimension=dimension, seed=seed)
    if kind == "http":
        if not url:
            raise ValueError("http embedder needs a url")
        return HttpEmbedder(url=url, dimension=dimension)
    raise ValueError(f"unknown embedder kind: {kind}")
