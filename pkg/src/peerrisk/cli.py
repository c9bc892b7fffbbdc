"""Command-line entry point: ingest, index, generate, evaluate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from .config import Config, load_config
from .corpus import Corpus, chunk_document, ingest_entry, load_chunks, load_manifest, save_chunks
from .embedding import CachingEmbedder, EmbeddingVector, HashedBagOfWordsEmbedder, HttpEmbeddingProvider
from .errors import (
    BadResponse,
    CacheMiss,
    EmptyList,
    EmptyReference,
    ModelMismatch,
    NoPeers,
    PeerRiskError,
    ProviderError,
)
from .index import VectorStore
from .llm import CacheMode, ChatGateway, HttpChatProvider, MockChatProvider, ResponseCache
from .metrics import (
    EvalScores,
    macro_average,
    micro_average,
    pair_stats,
    report_candidate_text,
    stats_to_scores,
    tokenize,
)
from .pipeline import (
    Mode,
    PipelineContext,
    load_peer_sets,
    load_report,
    run_baseline,
    run_contrastive,
    save_report,
    utc_now_iso,
)
from .prompts import TemplateSet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3

EMBED_BATCH = 128


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; remap to the documented code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="peerrisk", description="Peer-aware contrastive risk identification.")
    parser.add_argument("--config", type=Path, default=None, help="path to the YAML config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="normalize and chunk all manifest documents")
    p_ingest.set_defaults(func=cmd_ingest)

    p_index = sub.add_parser("index", help="embed chunks and persist the vector index")
    p_index.set_defaults(func=cmd_index)

    p_gen = sub.add_parser("generate", help="run the risk pipeline for one target")
    p_gen.add_argument("--target", required=True, help="target ticker")
    mode = p_gen.add_mutually_exclusive_group()
    mode.add_argument("--baseline", action="store_true", help="target-only final stage")
    mode.add_argument("--contrastive", action="store_true", help="peer-contrastive final stage (default)")
    p_gen.add_argument("--final-model", default=None, help="override the final-stage model")
    p_gen.add_argument("--out", type=Path, default=None, help="report path (default: reports dir)")
    p_gen.set_defaults(func=cmd_generate)

    p_eval = sub.add_parser("evaluate", help="score reports against reference texts")
    p_eval.add_argument("--manifest", required=True, type=Path, help="JSONL of {ticker, report_path, reference_path}")
    p_eval.add_argument("--out", type=Path, default=None, help="scores JSON path (default: next to manifest)")
    p_eval.add_argument("--average", choices=["macro", "micro"], default="macro")
    p_eval.add_argument("--candidate", choices=["full_text", "titles"], default="full_text")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def build_embedder(cfg: Config) -> CachingEmbedder:
    url = cfg.endpoints.embed_url
    if url.startswith("hash:"):
        dims = int(url.split(":", 1)[1] or "256")
        provider = HashedBagOfWordsEmbedder(dims=dims)
    else:
        provider = HttpEmbeddingProvider(
            url, model=cfg.models.embedding, api_key=os.environ.get(cfg.endpoints.api_key_env)
        )
    return CachingEmbedder(provider, path=cfg.cache.embed_path)


def build_gateway(cfg: Config) -> ChatGateway:
    cache = ResponseCache(cfg.cache.path)
    if cfg.cache.mode is CacheMode.REPLAY:
        provider = None
    elif cfg.endpoints.chat_url.startswith("mock:"):
        provider = MockChatProvider()
    else:
        provider = HttpChatProvider(
            cfg.endpoints.chat_url, api_key=os.environ.get(cfg.endpoints.api_key_env)
        )
    return ChatGateway(provider=provider, cache=cache, mode=cfg.cache.mode)


def _clock():
    """UTC clock for report timestamps; SOURCE_DATE_EPOCH pins it for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        fixed = datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        return lambda: fixed
    return utc_now_iso


def cmd_ingest(cfg: Config, args) -> int:
    entries = load_manifest(cfg.paths.corpus_manifest)
    base_dir = cfg.paths.corpus_manifest.parent
    all_chunks = []
    failures = 0
    for entry in entries:
        try:
            doc = ingest_entry(entry, base_dir)
            chunks = chunk_document(doc, cfg.retrieval.chunk_size_words, cfg.retrieval.overlap_words)
        except (OSError, PeerRiskError) as exc:
            failures += 1
            print(f"error: {entry.doc_id} ({entry.path}): {exc}", file=sys.stderr)
            continue
        all_chunks.extend(chunks)
        print(f"{entry.doc_id} ({entry.ticker}): {len(chunks)} chunks")
    save_chunks(all_chunks, cfg.paths.chunk_store)
    print(f"{len(entries) - failures} documents, {len(all_chunks)} chunks -> {cfg.paths.chunk_store}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_index(cfg: Config, args) -> int:
    if not cfg.paths.chunk_store.exists():
        print(f"error: chunk store not found at {cfg.paths.chunk_store}; run ingest first", file=sys.stderr)
        return EXIT_DATA
    chunks = load_chunks(cfg.paths.chunk_store)
    embedder = build_embedder(cfg)
    snapshot_path = cfg.paths.index_snapshot
    if snapshot_path.exists():
        existing = json.loads(snapshot_path.read_text(encoding="utf-8")).get("model_id")
        if existing != embedder.model_id:
            raise ModelMismatch(
                f"existing snapshot was built with model {existing!r}, config now says "
                f"{embedder.model_id!r}; delete {snapshot_path} to re-index"
            )
    store = VectorStore(embedder)
    for start in range(0, len(chunks), EMBED_BATCH):
        batch = chunks[start : start + EMBED_BATCH]
        vectors = embedder.embed_batch([c.text for c in batch])
        for chunk, values in zip(batch, vectors):
            store.add(chunk, EmbeddingVector(tuple(values), len(values), embedder.model_id))
    store.save(snapshot_path)
    print(f"indexed {len(store)} chunks | dims={store.dims} | model={store.model_id} -> {snapshot_path}")
    return EXIT_OK


def _build_context(cfg: Config, final_model: str | None) -> PipelineContext:
    corpus = Corpus(load_manifest(cfg.paths.corpus_manifest))
    chunks = load_chunks(cfg.paths.chunk_store)
    embedder = build_embedder(cfg)
    store = VectorStore.load(cfg.paths.index_snapshot, embedder, chunks)
    models = replace(cfg.models, final=final_model) if final_model else cfg.models
    return PipelineContext(
        corpus=corpus,
        store=store,
        gateway=build_gateway(cfg),
        templates=TemplateSet.load(cfg.paths.prompts_dir),
        models=models,
        k=cfg.retrieval.k,
        clock=_clock(),
    )


def cmd_generate(cfg: Config, args) -> int:
    target = args.target.upper()
    ctx = _build_context(cfg, args.final_model)
    if args.baseline:
        report = run_baseline(target, ctx)
    else:
        peer_sets = load_peer_sets(cfg.paths.peer_sets)
        if target not in peer_sets:
            raise NoPeers(f"no peer set entry for {target} in {cfg.paths.peer_sets}")
        report = run_contrastive(peer_sets[target], ctx)
    out = args.out if args.out else cfg.paths.reports_dir / f"{target}.{report.mode.value}.json"
    save_report(report, out)
    for item in report.items:
        print(f"{item.rank}. {item.title}")
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"report -> {out}")
    return EXIT_OK


def _read_eval_manifest(path: Path) -> list[dict]:
    rows = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _print_grid(rows: list[tuple[str, str, EvalScores]]) -> None:
    print(
        f"{'Model':<16} {'Algorithm':<12} "
        f"{'BERT-R':>8} {'BERT-F1':>8} {'R1-R':>8} {'R1-F1':>8} "
        f"{'R2-R':>8} {'R2-F1':>8} {'RL-R':>8} {'RL-F1':>8}"
    )
    for model, mode, s in rows:
        print(
            f"{model:<16} {mode:<12} "
            f"{s.bert.recall:>8.4f} {s.bert.f1:>8.4f} {s.rouge1.recall:>8.4f} {s.rouge1.f1:>8.4f} "
            f"{s.rouge2.recall:>8.4f} {s.rouge2.f1:>8.4f} {s.rougeL.recall:>8.4f} {s.rougeL.f1:>8.4f}"
        )


def cmd_evaluate(cfg: Config, args) -> int:
    rows = _read_eval_manifest(args.manifest)
    if not rows:
        raise EmptyList(f"evaluation manifest {args.manifest} has no rows")
    embedder = build_embedder(cfg)
    base = args.manifest.parent
    results = []
    failures = 0
    for row in rows:
        try:
            report = load_report(base / row["report_path"])
            reference = (base / row["reference_path"]).read_text(encoding="utf-8")
            if not reference.strip():
                raise EmptyReference(f"reference {row['reference_path']} is empty")
            stats = pair_stats(
                tokenize(report_candidate_text(report, args.candidate)),
                tokenize(reference),
                embedder,
            )
            results.append(
                {
                    "ticker": row["ticker"],
                    "mode": report.mode.value,
                    "final_model": report.final_model,
                    "scores": stats_to_scores(stats),
                    "stats": stats,
                }
            )
        except (OSError, KeyError, ValueError, PeerRiskError) as exc:
            failures += 1
            print(f"error: row {row.get('ticker', '?')}: {exc}", file=sys.stderr)
    if not results:
        print("error: no evaluation rows succeeded", file=sys.stderr)
        return EXIT_DATA

    groups: dict[tuple[str, str], list[dict]] = {}
    for r in results:
        groups.setdefault((r["final_model"], r["mode"]), []).append(r)
    grid = []
    for (model, mode), members in sorted(groups.items()):
        if args.average == "micro":
            agg = micro_average([m["stats"] for m in members])
        else:
            agg = macro_average([m["scores"] for m in members])
        grid.append((model, mode, agg))
    _print_grid(grid)

    payload = {
        "per_company": [
            {
                "ticker": r["ticker"],
                "mode": r["mode"],
                "final_model": r["final_model"],
                "scores": r["scores"].to_dict(),
            }
            for r in results
        ],
        "macro": macro_average([r["scores"] for r in results]).to_dict(),
    }
    if args.average == "micro":
        payload["micro"] = micro_average([r["stats"] for r in results]).to_dict()
    out = args.out if args.out else args.manifest.parent / "scores.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"scores -> {out}")
    return EXIT_DATA if failures else EXIT_OK


def _classify(exc: BaseException) -> int:
    seen: BaseException | None = exc
    while seen is not None:
        if isinstance(seen, (ProviderError, CacheMiss, BadResponse)):
            return EXIT_PROVIDER
        seen = seen.__cause__
    return EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0; usage errors exit 1
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except PeerRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _classify(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
