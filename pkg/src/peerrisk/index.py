"""Exact cosine-similarity vector index over document chunks."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .corpus import Chunk
from .embedding import EmbeddingVector, l2_norm
from .errors import (
    DimensionMismatch,
    DuplicateChunk,
    EmptyStore,
    InvalidParams,
    ModelMismatch,
    ZeroNorm,
)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity dot(a,b)/(|a||b|), clamped to [-1, 1] against rounding."""
    if a.dims != b.dims:
        raise DimensionMismatch(f"dims differ: {a.dims} vs {b.dims}")
    if a.values == b.values:
        return 1.0
    na = l2_norm(a.values)
    nb = l2_norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine undefined for zero-norm vector")
    dot = math.fsum(x * y for x, y in zip(a.values, b.values))
    return max(-1.0, min(1.0, dot / (na * nb)))


@dataclass(frozen=True)
class ChunkHit:
    chunk: Chunk
    score: float


class VectorStore:
    """In-memory exhaustive-scan index, persisted as a single JSON snapshot.

    Queries may run concurrently; add() and save() take the write lock.
    """

    def __init__(self, embedder):
        self._embedder = embedder
        self._chunks: list[Chunk] = []
        self._raw: list[tuple[float, ...]] = []
        self._units: list[np.ndarray] = []
        self._keys: set[tuple[str, int]] = set()
        self._matrix: np.ndarray | None = None
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._chunks)

    @property
    def model_id(self) -> str:
        return self._embedder.model_id

    @property
    def dims(self) -> int | None:
        if self._raw:
            return len(self._raw[0])
        return self._embedder.dims

    def add(self, chunk: Chunk, vec: EmbeddingVector) -> None:
        if vec.model_id != self.model_id:
            raise ModelMismatch(f"vector model {vec.model_id!r} != store model {self.model_id!r}")
        expected = self.dims
        if expected is not None and vec.dims != expected:
            raise ModelMismatch(f"vector dims {vec.dims} != store dims {expected}")
        with self._lock:
            if chunk.key in self._keys:
                raise DuplicateChunk(f"chunk {chunk.key} already indexed")
            arr = np.asarray(vec.values, dtype=np.float64)
            self._chunks.append(chunk)
            self._raw.append(tuple(vec.values))
            self._units.append(arr / np.linalg.norm(arr))
            self._keys.add(chunk.key)
            self._matrix = None

    def add_text(self, chunk: Chunk) -> None:
        """Embed the chunk text through the store's embedder and add it."""
        self.add(chunk, self._embedder.embed(chunk.text))

    def _unit_matrix(self) -> np.ndarray:
        with self._lock:
            if self._matrix is None:
                self._matrix = np.vstack(self._units) if self._units else np.zeros((0, 0))
            return self._matrix

    def query_top_k(
        self,
        query_text: str,
        k: int,
        filter: Callable[[Chunk], bool] | None = None,
    ) -> list[ChunkHit]:
        """Top-k chunks by cosine score, descending; ties break by (doc_id, seq)."""
        if k <= 0:
            raise InvalidParams(f"k must be positive, got {k}")
        rows = [i for i, c in enumerate(self._chunks) if filter is None or filter(c)]
        if not rows:
            raise EmptyStore("no chunks match the query filter" if self._chunks else "store is empty")
        qvec = self._embedder.embed(query_text)
        q = np.asarray(qvec.values, dtype=np.float64)
        q = q / np.linalg.norm(q)
        # Elementwise product + per-row reduction instead of BLAS matvec: the
        # result is then identical for identical rows regardless of row
        # position, so equal vectors tie exactly and the tie-break applies.
        scores = (self._unit_matrix()[rows] * q).sum(axis=1)
        ranked = sorted(
            zip(rows, scores),
            key=lambda pair: (-pair[1], self._chunks[pair[0]].doc_id, self._chunks[pair[0]].seq),
        )
        return [
            ChunkHit(chunk=self._chunks[i], score=max(-1.0, min(1.0, float(s))))
            for i, s in ranked[:k]
        ]

    def save(self, path: Path) -> None:
        """Persist {model_id, dims, entries:[{doc_id, seq, values}]} as JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            snapshot = {
                "model_id": self.model_id,
                "dims": self.dims,
                "entries": [
                    {"doc_id": c.doc_id, "seq": c.seq, "values": list(raw)}
                    for c, raw in zip(self._chunks, self._raw)
                ],
            }
        path.write_text(json.dumps(snapshot), encoding="utf-8")

    @classmethod
    def load(cls, path: Path, embedder, chunks: list[Chunk]) -> "VectorStore":
        """Rebuild a store from a snapshot, rejoining chunk text by (doc_id, seq)."""
        snapshot = json.loads(Path(path).read_text(encoding="utf-8"))
        if snapshot["model_id"] != embedder.model_id:
            raise ModelMismatch(
                f"snapshot model {snapshot['model_id']!r} != embedder model {embedder.model_id!r}"
            )
        by_key = {c.key: c for c in chunks}
        store = cls(embedder)
        for entry in snapshot["entries"]:
            key = (entry["doc_id"], entry["seq"])
            if key not in by_key:
                raise InvalidParams(f"snapshot entry {key} is missing from the chunk store")
            vec = EmbeddingVector(
                values=tuple(float(v) for v in entry["values"]),
                dims=snapshot["dims"],
                model_id=snapshot["model_id"],
            )
            store.add(by_key[key], vec)
        return store
