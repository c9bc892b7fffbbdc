"""YAML run configuration with offline-friendly defaults.

Relative paths resolve against the config file's directory (or the working
directory when no file is given). The default endpoints are the bundled
offline providers: `mock:` for chat and `hash:<dims>` for embeddings; point
them at real HTTP endpoints for live runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .llm import CacheMode, ModelConfig


@dataclass(frozen=True)
class EndpointConfig:
    chat_url: str = "mock:"
    embed_url: str = "hash:256"
    api_key_env: str = "OPENAI_API_KEY"


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 20
    chunk_size_words: int = 350
    overlap_words: int = 50


@dataclass(frozen=True)
class CacheConfig:
    path: Path = Path("cache/llm_responses.jsonl")
    mode: CacheMode = CacheMode.RECORD
    embed_path: Path = Path("cache/embeddings.jsonl")


@dataclass(frozen=True)
class PathsConfig:
    corpus_manifest: Path = Path("corpus/manifest.jsonl")
    peer_sets: Path = Path("corpus/peer_sets.json")
    prompts_dir: Path | None = None
    index_snapshot: Path = Path("artifacts/index.json")
    chunk_store: Path = Path("artifacts/chunks.jsonl")
    reports_dir: Path = Path("reports")


@dataclass(frozen=True)
class Config:
    endpoints: EndpointConfig = field(default_factory=EndpointConfig)
    models: ModelConfig = field(default_factory=ModelConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)


_SECTION_KEYS = {
    "endpoints": {"chat_url", "embed_url", "api_key_env"},
    "models": {"extraction", "aggregation", "final", "reasoning_level", "temperatures", "embedding"},
    "retrieval": {"k", "chunk_size_words", "overlap_words"},
    "cache": {"path", "mode", "embed_path"},
    "paths": {
        "corpus_manifest",
        "peer_sets",
        "prompts_dir",
        "index_snapshot",
        "chunk_store",
        "reports_dir",
    },
}


def _section(data: dict, name: str) -> dict:
    section = data.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    unknown = set(section) - _SECTION_KEYS[name]
    if unknown:
        raise ConfigError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    return section


def _resolve(base: Path, value) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path: Path | None = None) -> Config:
    """Load the config file (all keys optional) and validate invariants."""
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        base = path.parent
    else:
        data = {}
        base = Path.cwd()
    unknown = set(data) - set(_SECTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    end = _section(data, "endpoints")
    endpoints = EndpointConfig(
        chat_url=end.get("chat_url", EndpointConfig.chat_url),
        embed_url=end.get("embed_url", EndpointConfig.embed_url),
        api_key_env=end.get("api_key_env", EndpointConfig.api_key_env),
    )

    mod = _section(data, "models")
    defaults = ModelConfig()
    temperatures = mod.get("temperatures") or {}
    if not isinstance(temperatures, dict):
        raise ConfigError("models.temperatures must be a mapping of stage -> float")
    models = ModelConfig(
        extraction=mod.get("extraction", defaults.extraction),
        aggregation=mod.get("aggregation", defaults.aggregation),
        final=mod.get("final", defaults.final),
        reasoning_level=mod.get("reasoning_level", defaults.reasoning_level),
        temperatures={str(k): float(v) for k, v in temperatures.items()},
        embedding=mod.get("embedding", defaults.embedding),
    )

    ret = _section(data, "retrieval")
    retrieval = RetrievalConfig(
        k=int(ret.get("k", RetrievalConfig.k)),
        chunk_size_words=int(ret.get("chunk_size_words", RetrievalConfig.chunk_size_words)),
        overlap_words=int(ret.get("overlap_words", RetrievalConfig.overlap_words)),
    )
    if retrieval.k <= 0:
        raise ConfigError(f"retrieval.k must be positive, got {retrieval.k}")
    if not 0 <= retrieval.overlap_words < retrieval.chunk_size_words:
        raise ConfigError(
            f"retrieval.overlap_words must satisfy 0 <= overlap < chunk_size_words, "
            f"got overlap={retrieval.overlap_words} size={retrieval.chunk_size_words}"
        )

    cac = _section(data, "cache")
    try:
        mode = CacheMode(cac.get("mode", CacheConfig.mode.value))
    except ValueError:
        raise ConfigError(f"cache.mode must be one of {[m.value for m in CacheMode]}") from None
    cache = CacheConfig(
        path=_resolve(base, cac.get("path", CacheConfig.path)),
        mode=mode,
        embed_path=_resolve(base, cac.get("embed_path", CacheConfig.embed_path)),
    )
    if cache.mode is CacheMode.REPLAY and not cache.path.exists():
        raise ConfigError(f"cache.mode=replay requires an existing cache file at {cache.path}")

    pat = _section(data, "paths")
    prompts_dir = pat.get("prompts_dir")
    paths = PathsConfig(
        corpus_manifest=_resolve(base, pat.get("corpus_manifest", PathsConfig.corpus_manifest)),
        peer_sets=_resolve(base, pat.get("peer_sets", PathsConfig.peer_sets)),
        prompts_dir=_resolve(base, prompts_dir) if prompts_dir else None,
        index_snapshot=_resolve(base, pat.get("index_snapshot", PathsConfig.index_snapshot)),
        chunk_store=_resolve(base, pat.get("chunk_store", PathsConfig.chunk_store)),
        reports_dir=_resolve(base, pat.get("reports_dir", PathsConfig.reports_dir)),
    )

    return Config(endpoints=endpoints, models=models, retrieval=retrieval, cache=cache, paths=paths)
