"""Chat-completion gateway: providers, response cache, and per-stage models.

Every model call flows through ChatGateway.complete(), which consults a
content-addressed cache first. A fully recorded cache replays a pipeline run
byte-for-byte with zero network traffic.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import requests

from ._http import post_json
from .errors import BadResponse, CacheMiss, InvalidParams, ProviderError, UnknownStage

REASONING_LEVELS = ("low", "medium", "high")


class Stage(str, Enum):
    EXTRACTION = "extraction"
    AGGREGATION = "aggregation"
    FINAL = "final"


class CacheMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass(frozen=True)
class LlmRequest:
    model: str
    user: str
    system: str | None = None
    temperature: float = 0.0
    max_output: int | None = None
    reasoning_level: str | None = None

    def __post_init__(self):
        if not self.user:
            raise InvalidParams("user message must be non-empty")
        if self.temperature < 0:
            raise InvalidParams(f"temperature must be >= 0, got {self.temperature}")
        if self.reasoning_level is not None and self.reasoning_level not in REASONING_LEVELS:
            raise InvalidParams(f"reasoning_level must be one of {REASONING_LEVELS}")

    def canonical(self) -> dict:
        return {
            "model": self.model,
            "system": self.system,
            "user": self.user,
            "temperature": self.temperature,
            "max_output": self.max_output,
            "reasoning_level": self.reasoning_level,
        }

    def cache_key(self) -> str:
        """SHA-256 over the canonical JSON form; insensitive to field order."""
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_payload(self) -> dict:
        messages = []
        if self.system:
            messages.append({"role": "system", "content": self.system})
        messages.append({"role": "user", "content": self.user})
        payload = {"model": self.model, "messages": messages, "temperature": self.temperature}
        if self.max_output is not None:
            payload["max_tokens"] = self.max_output
        if self.reasoning_level is not None:
            payload["reasoning_effort"] = self.reasoning_level
        return payload


@dataclass(frozen=True)
class LlmExchange:
    request: LlmRequest
    response_text: str
    latency_ms: int
    from_cache: bool


class ResponseCache:
    """Append-only JSON Lines cache of {key, request, response_text}."""

    def __init__(self, path: Path | None = None):
        self._path = Path(path) if path is not None else None
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            with self._path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        row = json.loads(line)
                        self._mem[row["key"]] = row["response_text"]

    def __len__(self) -> int:
        return len(self._mem)

    def get(self, key: str) -> str | None:
        with self._lock:
            return self._mem.get(key)

    def put(self, key: str, request: LlmRequest, response_text: str, persist: bool = True) -> None:
        with self._lock:
            if key in self._mem:
                return
            self._mem[key] = response_text
            if persist and self._path is not None:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(
                        json.dumps(
                            {"key": key, "request": request.canonical(), "response_text": response_text},
                            ensure_ascii=False,
                        )
                        + "\n"
                    )


class HttpChatProvider:
    """Client for any chat-completions-compatible endpoint.

    Wire format: POST {"model", "messages", "temperature", optional
    "max_tokens"/"reasoning_effort"} -> {"choices":[{"message":{"content"}}]}.
    """

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        session=None,
        timeout: float = 120.0,
        attempts: int = 3,
        backoff_base: float = 1.0,
        sleep=time.sleep,
    ):
        self.url = url
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._session = session if session is not None else requests.Session()
        self._timeout = timeout
        self._attempts = attempts
        self._backoff_base = backoff_base
        self._sleep = sleep

    def send(self, request: LlmRequest) -> str:
        body = post_json(
            self._session,
            self.url,
            request.to_payload(),
            headers=self._headers,
            timeout=self._timeout,
            attempts=self._attempts,
            backoff_base=self._backoff_base,
            sleep=self._sleep,
        )
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BadResponse(f"response from {self.url} has no message content") from exc
        if not isinstance(content, str) or not content:
            raise BadResponse(f"response from {self.url} has empty content")
        return content


_MOCK_TITLES = (
    "Supply Chain Concentration",
    "Regulatory Exposure",
    "Margin Compression",
    "Customer Concentration",
    "Funding and Liquidity",
)


class MockChatProvider:
    """Offline deterministic provider for tests and dry runs.

    The response is a fixed numbered risk list salted with the request's
    cache key, so distinct requests get distinct but reproducible text.
    """

    def __init__(self, n_items: int = 3):
        if not 1 <= n_items <= len(_MOCK_TITLES):
            raise InvalidParams(f"n_items must be in [1, {len(_MOCK_TITLES)}]")
        self.n_items = n_items
        self.calls: list[LlmRequest] = []
        self._lock = threading.Lock()

    def send(self, request: LlmRequest) -> str:
        with self._lock:
            self.calls.append(request)
        salt = request.cache_key()[:8]
        lines = [
            f"{i}. {title} — mock rationale {salt} for model {request.model}"
            for i, title in enumerate(_MOCK_TITLES[: self.n_items], start=1)
        ]
        return "\n".join(lines)


class ChatGateway:
    """Cache-first completion client with bounded concurrency.

    Modes: `record` persists new responses to the cache file, `live` keeps
    them in memory only, `replay` never touches the provider and raises
    CacheMiss for unseen requests.
    """

    def __init__(
        self,
        provider=None,
        cache: ResponseCache | None = None,
        mode: CacheMode = CacheMode.RECORD,
        max_in_flight: int = 4,
    ):
        self.provider = provider
        self.cache = cache if cache is not None else ResponseCache()
        self.mode = CacheMode(mode)
        self.max_in_flight = max_in_flight
        self._sem = threading.BoundedSemaphore(max_in_flight)
        self._log_lock = threading.Lock()
        self.request_log: list[LlmExchange] = []

    def complete(self, request: LlmRequest) -> LlmExchange:
        key = request.cache_key()
        cached = self.cache.get(key)
        if cached is not None:
            return self._record(LlmExchange(request, cached, latency_ms=0, from_cache=True))
        if self.mode is CacheMode.REPLAY:
            raise CacheMiss(f"no cached response for key {key}")
        if self.provider is None:
            raise ProviderError("no chat provider configured")
        started = time.monotonic()
        with self._sem:
            text = self.provider.send(request)
        latency_ms = int((time.monotonic() - started) * 1000)
        if not text:
            raise BadResponse("provider returned empty text")
        self.cache.put(key, request, text, persist=self.mode is CacheMode.RECORD)
        return self._record(LlmExchange(request, text, latency_ms=latency_ms, from_cache=False))

    def _record(self, exchange: LlmExchange) -> LlmExchange:
        with self._log_lock:
            self.request_log.append(exchange)
        return exchange


# --- per-stage model selection -------------------------------------------------

@dataclass(frozen=True)
class ModelConfig:
    extraction: str = "gpt-4.1-mini"
    aggregation: str = "gpt-4.1"
    final: str = "o3"
    reasoning_level: str | None = "medium"
    temperatures: dict = field(default_factory=dict)
    embedding: str = "text-embedding-3-small"


@dataclass(frozen=True)
class StageParams:
    model: str
    temperature: float
    reasoning_level: str | None = None


_REASONING_MODEL_RE = re.compile(r"^o\d")


def stage_model(stage, config: ModelConfig) -> StageParams:
    """Model and decoding parameters for one pipeline stage.

    The reasoning level only applies to the final stage and only for
    reasoning-family models (o3, o4-mini, ...).
    """
    try:
        stage = Stage(stage)
    except ValueError:
        raise UnknownStage(f"unknown stage {stage!r}") from None
    model = {
        Stage.EXTRACTION: config.extraction,
        Stage.AGGREGATION: config.aggregation,
        Stage.FINAL: config.final,
    }[stage]
    temperature = float(config.temperatures.get(stage.value, 0.0))
    reasoning = None
    if stage is Stage.FINAL and config.reasoning_level and _REASONING_MODEL_RE.match(model):
        reasoning = config.reasoning_level
    return StageParams(model=model, temperature=temperature, reasoning_level=reasoning)
