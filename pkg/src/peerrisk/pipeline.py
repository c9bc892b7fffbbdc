"""End-to-end orchestration: retrieve, extract, aggregate, then run the
baseline or contrastive final stage over a peer set and parse the ranked
risk list."""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable

from .corpus import Corpus, DocKind
from .errors import (
    EmptyExtraction,
    NoDocuments,
    NoPeers,
    ParseError,
    PeerRiskError,
    PipelineError,
    TargetInPeers,
)
from .index import VectorStore
from .llm import ChatGateway, LlmExchange, LlmRequest, ModelConfig, Stage, stage_model
from .prompts import RiskBlock, TemplateSet, build_peer_blocks


class Mode(str, Enum):
    BASELINE = "baseline"
    CONTRASTIVE = "contrastive"


@dataclass(frozen=True)
class PeerSet:
    target_ticker: str
    sub_sector: str
    peer_tickers: tuple[str, ...]

    def __post_init__(self):
        if not self.peer_tickers:
            raise NoPeers(f"peer set for {self.target_ticker} has no peers")
        if len(set(self.peer_tickers)) != len(self.peer_tickers):
            raise TargetInPeers(f"peer set for {self.target_ticker} has duplicate peers")
        if self.target_ticker in self.peer_tickers:
            raise TargetInPeers(f"{self.target_ticker} appears in its own peer list")


def load_peer_sets(path: Path) -> dict[str, PeerSet]:
    """Read the {"TICKER": {"sub_sector": ..., "peers": [...]}} mapping."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        ticker.upper(): PeerSet(
            target_ticker=ticker.upper(),
            sub_sector=entry["sub_sector"],
            peer_tickers=tuple(p.upper() for p in entry["peers"]),
        )
        for ticker, entry in raw.items()
    }


@dataclass
class AggregatedRisk:
    ticker: str
    text: str
    source_exchanges: list[LlmExchange]
    chunk_count: int


@dataclass(frozen=True)
class RiskItem:
    rank: int
    title: str
    rationale: str


@dataclass
class RiskReport:
    ticker: str
    mode: Mode
    items: list[RiskItem]
    final_model: str
    created_at: str
    full_text: str
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "mode": self.mode.value,
            "final_model": self.final_model,
            "items": [
                {"rank": i.rank, "title": i.title, "rationale": i.rationale} for i in self.items
            ],
            "full_text": self.full_text,
            "warnings": list(self.warnings),
            "created_at": self.created_at,
        }


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class PipelineContext:
    """Everything a pipeline run needs, wired once by the caller."""

    corpus: Corpus
    store: VectorStore
    gateway: ChatGateway
    templates: TemplateSet
    models: ModelConfig
    k: int = 20
    doc_kinds: tuple[DocKind, ...] | None = None
    clock: Callable[[], str] = utc_now_iso


def _stage_request(params, prompt: str) -> LlmRequest:
    return LlmRequest(
        model=params.model,
        user=prompt,
        temperature=params.temperature,
        reasoning_level=params.reasoning_level,
    )


def extract_company_risks(ticker: str, ctx: PipelineContext) -> AggregatedRisk:
    """Retrieve top-k chunks for the ticker, extract per chunk, then aggregate."""
    company = ctx.corpus.company(ticker)
    if company is None:
        raise NoDocuments(f"no documents for ticker {ticker}")
    doc_ids = ctx.corpus.doc_ids(ticker, ctx.doc_kinds)
    question = ctx.templates.risk_query()
    hits = ctx.store.query_top_k(question, ctx.k, filter=lambda c: c.doc_id in doc_ids)

    ext = stage_model(Stage.EXTRACTION, ctx.models)
    requests = [
        _stage_request(
            ext,
            ctx.templates.render(
                "extraction",
                {
                    "name": company.company_name,
                    "ticker": ticker,
                    "industry": company.industry,
                    "data": hit.chunk.text,
                },
            ).rendered,
        )
        for hit in hits
    ]
    if len(requests) == 1:
        exchanges = [ctx.gateway.complete(requests[0])]
    else:
        with ThreadPoolExecutor(max_workers=ctx.gateway.max_in_flight) as pool:
            exchanges = list(pool.map(ctx.gateway.complete, requests))

    answers = [e.response_text for e in exchanges if e.response_text.strip()]
    if not answers:
        raise EmptyExtraction(f"all {len(exchanges)} chunk extractions for {ticker} were empty")

    agg = stage_model(Stage.AGGREGATION, ctx.models)
    agg_prompt = ctx.templates.render(
        "aggregation",
        {
            "name": company.company_name,
            "ticker": ticker,
            "industry": company.industry,
            "question": question,
            "data": "\n\n".join(answers),  # retrieval rank order, for determinism
        },
    ).rendered
    agg_exchange = ctx.gateway.complete(_stage_request(agg, agg_prompt))
    return AggregatedRisk(
        ticker=ticker,
        text=agg_exchange.response_text,
        source_exchanges=exchanges,
        chunk_count=len(exchanges),
    )


def run_baseline(target: str, ctx: PipelineContext) -> RiskReport:
    """Final-stage inference over the target's aggregated risks alone."""
    company = ctx.corpus.company(target)
    if company is None:
        raise NoDocuments(f"no documents for ticker {target}")
    aggregated = extract_company_risks(target, ctx)
    final = stage_model(Stage.FINAL, ctx.models)
    prompt = ctx.templates.render(
        "baseline_final",
        {
            "target_company_name": company.company_name,
            "target_company_ticker": target,
            "data": aggregated.text,
        },
    ).rendered
    exchange = ctx.gateway.complete(_stage_request(final, prompt))
    return _finish_report(target, Mode.BASELINE, final.model, exchange.response_text, ctx)


def run_contrastive(peer_set: PeerSet, ctx: PipelineContext) -> RiskReport:
    """Final-stage inference contrasting the target against its peers."""
    if not peer_set.peer_tickers:
        raise NoPeers(f"peer set for {peer_set.target_ticker} has no peers")
    tickers = [peer_set.target_ticker, *peer_set.peer_tickers]

    def one(ticker: str) -> AggregatedRisk:
        try:
            return extract_company_risks(ticker, ctx)
        except PeerRiskError as exc:
            raise PipelineError(f"{ticker}: {exc}", ticker=ticker) from exc

    with ThreadPoolExecutor(max_workers=min(len(tickers), 4)) as pool:
        aggregated = list(pool.map(one, tickers))

    def block(ticker: str, agg: AggregatedRisk) -> RiskBlock:
        company = ctx.corpus.company(ticker)
        return RiskBlock(name=company.company_name, ticker=ticker, risk_text=agg.text)

    peer_blocks = build_peer_blocks(
        block(peer_set.target_ticker, aggregated[0]),
        [block(t, a) for t, a in zip(peer_set.peer_tickers, aggregated[1:])],
    )
    final = stage_model(Stage.FINAL, ctx.models)
    target_company = ctx.corpus.company(peer_set.target_ticker)
    prompt = ctx.templates.render(
        "contrastive",
        {
            "sub_sector": peer_set.sub_sector,
            "target_company_name": target_company.company_name,
            "target_company_ticker": peer_set.target_ticker,
            "peer_blocks": peer_blocks,
        },
    ).rendered
    exchange = ctx.gateway.complete(_stage_request(final, prompt))
    return _finish_report(
        peer_set.target_ticker, Mode.CONTRASTIVE, final.model, exchange.response_text, ctx
    )


def _finish_report(ticker: str, mode: Mode, model: str, text: str, ctx: PipelineContext) -> RiskReport:
    items = parse_risk_report(text)
    warnings = []
    if not 3 <= len(items) <= 5:
        warnings.append(f"expected 3-5 ranked risks, parsed {len(items)}; keeping all items")
    return RiskReport(
        ticker=ticker,
        mode=mode,
        items=items,
        final_model=model,
        created_at=ctx.clock(),
        full_text=text,
        warnings=warnings,
    )


def save_report(report: RiskReport, path: Path) -> None:
    """Write the report JSON exactly as specified by the external interface."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report.to_json_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_report(path: Path) -> RiskReport:
    """Read a report written by save_report back into a RiskReport."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return RiskReport(
        ticker=raw["ticker"],
        mode=Mode(raw["mode"]),
        items=[
            RiskItem(rank=i["rank"], title=i["title"], rationale=i["rationale"])
            for i in raw["items"]
        ],
        final_model=raw["final_model"],
        created_at=raw["created_at"],
        full_text=raw["full_text"],
        warnings=list(raw.get("warnings", [])),
    )


_ITEM_RE = re.compile(r"^\s*\d+[.)]\s+(.*\S)\s*$")
# Title/rationale separator: spaced hyphen, en/em dash (spaces optional), or colon.
_SEPARATOR_RE = re.compile(r"\s[-–—]\s|[–—]|:")


def parse_risk_report(text: str) -> list[RiskItem]:
    """Parse numbered "N. Title — rationale" lines; ranks renumbered 1..n."""
    items = []
    for line in text.splitlines():
        match = _ITEM_RE.match(line)
        if not match:
            continue
        body = match.group(1).strip()
        sep = _SEPARATOR_RE.search(body)
        if sep:
            title = body[: sep.start()].strip()
            rationale = body[sep.end() :].strip()
        else:
            title, rationale = body, ""
        if not title:
            continue
        items.append(RiskItem(rank=len(items) + 1, title=title, rationale=rationale))
    if not items:
        raise ParseError("no ranked risk items found in final-stage output")
    return items
