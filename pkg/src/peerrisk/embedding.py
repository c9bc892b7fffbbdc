"""Embedding providers and the persistent text-hash embedding cache.

Providers expose `model_id`, `dims` (may be None until the first call for
remote models) and `embed_batch(texts) -> list[list[float]]`.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

import requests

from ._http import post_json
from .errors import DimensionMismatch, EmptyInput, InvalidParams, ProviderError, ZeroNorm


def l2_norm(values) -> float:
    return math.sqrt(math.fsum(v * v for v in values))


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dims: int
    model_id: str

    def __post_init__(self):
        if len(self.values) != self.dims:
            raise DimensionMismatch(f"expected {self.dims} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise InvalidParams("embedding contains non-finite values")
        if l2_norm(self.values) == 0.0:
            raise ZeroNorm("embedding has zero L2 norm")


def _text_sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class HashedBagOfWordsEmbedder:
    """Deterministic offline embedder: words hashed onto fixed coordinates.

    Each whitespace-delimited word contributes 1.0 to the coordinate given by
    the first 8 bytes of its SHA-256 digest, and the vector is L2-normalized.
    Identical text yields identical vectors on every platform.
    """

    def __init__(self, dims: int = 256):
        if dims <= 0:
            raise InvalidParams(f"dims must be positive, got {dims}")
        self.dims = dims
        self.model_id = f"hashed-bow-{dims}"

    def embed_batch(self, texts) -> list[list[float]]:
        return [self._embed(t) for t in texts]

    def _embed(self, text: str) -> list[float]:
        words = text.lower().split()
        if not words:
            raise EmptyInput("cannot embed empty text")
        vec = [0.0] * self.dims
        for word in words:
            coord = int.from_bytes(hashlib.sha256(word.encode("utf-8")).digest()[:8], "big")
            vec[coord % self.dims] += 1.0
        norm = l2_norm(vec)
        return [v / norm for v in vec]


class HttpEmbeddingProvider:
    """Client for the standard embeddings endpoint.

    Wire format: POST {"model": ..., "input": [text, ...]} ->
    {"data": [{"embedding": [...]}, ...]}, entries in input order (re-sorted
    by "index" when the server includes it).
    """

    def __init__(
        self,
        url: str,
        model: str,
        api_key: str | None = None,
        session=None,
        timeout: float = 120.0,
        attempts: int = 3,
        backoff_base: float = 1.0,
    ):
        self.url = url
        self.model_id = model
        self.dims: int | None = None
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._session = session if session is not None else requests.Session()
        self._timeout = timeout
        self._attempts = attempts
        self._backoff_base = backoff_base

    def embed_batch(self, texts) -> list[list[float]]:
        texts = list(texts)
        body = post_json(
            self._session,
            self.url,
            {"model": self.model_id, "input": texts},
            headers=self._headers,
            timeout=self._timeout,
            attempts=self._attempts,
            backoff_base=self._backoff_base,
        )
        try:
            data = body["data"]
            if any("index" in row for row in data):
                data = sorted(data, key=lambda row: row["index"])
            vectors = [[float(v) for v in row["embedding"]] for row in data]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response from {self.url}: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(
                f"embedding response carries {len(vectors)} vectors for {len(texts)} inputs"
            )
        if self.dims is None and vectors:
            self.dims = len(vectors[0])
        return vectors


class CachingEmbedder:
    """Provider wrapper that caches vectors by (model_id, sha256(text)).

    Repeat embeddings of the same text never reach the provider. With a file
    path the cache persists as JSON Lines and is reloaded on construction, so
    a warm cache survives across processes. Safe for concurrent lookup and
    insert of distinct keys.
    """

    def __init__(self, provider, path: Path | None = None):
        self.provider = provider
        self._path = Path(path) if path is not None else None
        self._mem: dict[str, list[float]] = {}
        self._lock = threading.Lock()
        self._dims: int | None = None
        if self._path is not None and self._path.exists():
            with self._path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    if row.get("model_id") == provider.model_id:
                        self._mem[row["sha"]] = [float(v) for v in row["values"]]
            if self._mem:
                self._dims = len(next(iter(self._mem.values())))

    @property
    def model_id(self) -> str:
        return self.provider.model_id

    @property
    def dims(self) -> int | None:
        return self._dims if self._dims is not None else getattr(self.provider, "dims", None)

    def embed(self, text: str) -> EmbeddingVector:
        values = self.embed_batch([text])[0]
        return EmbeddingVector(values=tuple(values), dims=len(values), model_id=self.model_id)

    def embed_batch(self, texts) -> list[list[float]]:
        texts = list(texts)
        if any(not t.strip() for t in texts):
            raise EmptyInput("cannot embed empty text")
        shas = [_text_sha(t) for t in texts]
        with self._lock:
            missing = [(i, t) for i, (t, sha) in enumerate(zip(texts, shas)) if sha not in self._mem]
        if missing:
            fetched = self.provider.embed_batch([t for _, t in missing])
            with self._lock:
                for (i, _), values in zip(missing, fetched):
                    self._store(shas[i], values)
        with self._lock:
            return [list(self._mem[sha]) for sha in shas]

    def _store(self, sha: str, values: list[float]) -> None:
        if self._dims is None:
            self._dims = len(values)
        elif len(values) != self._dims:
            raise DimensionMismatch(
                f"provider returned {len(values)}-dim vector for a {self._dims}-dim cache"
            )
        if sha in self._mem:
            return
        self._mem[sha] = list(values)
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"model_id": self.model_id, "sha": sha, "values": values}) + "\n")
