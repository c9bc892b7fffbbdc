"""Shared test stubs: canned embedders, counting providers, HTTP session fakes."""

from __future__ import annotations

import json
import threading

from peerrisk.embedding import EmbeddingVector, l2_norm


class MapEmbedder:
    """Embedder backed by an explicit text -> vector mapping."""

    def __init__(self, mapping: dict[str, list[float]], dims: int, model_id: str = "map-test"):
        self.mapping = dict(mapping)
        self.dims = dims
        self.model_id = model_id
        self.calls = 0

    def embed_batch(self, texts):
        self.calls += 1
        return [list(self.mapping[t]) for t in texts]

    def embed(self, text) -> EmbeddingVector:
        values = tuple(self.mapping[text])
        return EmbeddingVector(values=values, dims=self.dims, model_id=self.model_id)


class CountingEmbedder:
    """Wraps a provider and counts embed_batch invocations and texts seen."""

    def __init__(self, provider):
        self.provider = provider
        self.model_id = provider.model_id
        self.batch_calls = 0
        self.texts_embedded = 0
        self._lock = threading.Lock()

    @property
    def dims(self):
        return self.provider.dims

    def embed_batch(self, texts):
        texts = list(texts)
        with self._lock:
            self.batch_calls += 1
            self.texts_embedded += len(texts)
        return self.provider.embed_batch(texts)


class ScriptedChatProvider:
    """Chat provider returning a fixed text, or per-model texts."""

    def __init__(self, text: str = "", by_model: dict[str, str] | None = None):
        self.text = text
        self.by_model = by_model or {}
        self.calls = []
        self._lock = threading.Lock()

    def send(self, request):
        with self._lock:
            self.calls.append(request)
        return self.by_model.get(request.model, self.text)


class FakeResponse:
    def __init__(self, status_code: int, body=None):
        self.status_code = status_code
        self._body = body if body is not None else {}

    def json(self):
        if isinstance(self._body, Exception):
            raise self._body
        return self._body


class FakeSession:
    """requests.Session stand-in; pops canned responses in order."""

    def __init__(self, responses: list[FakeResponse]):
        self.responses = list(responses)
        self.requests: list[dict] = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers, "timeout": timeout})
        if not self.responses:
            raise AssertionError("FakeSession ran out of canned responses")
        return self.responses.pop(0)


def chat_response(text: str) -> FakeResponse:
    return FakeResponse(200, {"choices": [{"message": {"content": text}}]})


def embed_response(vectors: list[list[float]], with_index: bool = False) -> FakeResponse:
    data = [
        {"embedding": v, **({"index": i} if with_index else {})} for i, v in enumerate(vectors)
    ]
    return FakeResponse(200, {"data": data})


def unit(values):
    norm = l2_norm(values)
    return [v / norm for v in values]


def read_jsonl(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
