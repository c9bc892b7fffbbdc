"""Peer-aware contrastive risk identification over filings and transcripts.

Retrieval over chunked documents feeds a three-stage LLM pipeline
(extraction, aggregation, final ranking), run either target-only (baseline)
or against an industry peer set (contrastive). Outputs are scored with
self-implemented ROUGE-1/2/L and BERTScore.
"""

from . import errors
from .corpus import Chunk, Corpus, DocKind, Document, chunk_document, ingest_document
from .embedding import CachingEmbedder, EmbeddingVector, HashedBagOfWordsEmbedder, HttpEmbeddingProvider
from .index import ChunkHit, VectorStore, cosine
from .llm import (
    CacheMode,
    ChatGateway,
    HttpChatProvider,
    LlmExchange,
    LlmRequest,
    MockChatProvider,
    ModelConfig,
    ResponseCache,
    Stage,
    stage_model,
)
from .metrics import (
    EvalScores,
    PrfScore,
    bert_score,
    macro_average,
    micro_average,
    rouge_l,
    rouge_n,
    score_report,
    score_texts,
    tokenize,
)
from .pipeline import (
    AggregatedRisk,
    Mode,
    PeerSet,
    PipelineContext,
    RiskItem,
    RiskReport,
    extract_company_risks,
    parse_risk_report,
    run_baseline,
    run_contrastive,
)
from .prompts import PromptInstance, PromptTemplate, RiskBlock, TemplateSet, build_peer_blocks, render, risk_query

__version__ = "0.1.0"

__all__ = [
    "AggregatedRisk",
    "CacheMode",
    "CachingEmbedder",
    "ChatGateway",
    "Chunk",
    "ChunkHit",
    "Corpus",
    "DocKind",
    "Document",
    "EmbeddingVector",
    "EvalScores",
    "HashedBagOfWordsEmbedder",
    "HttpChatProvider",
    "HttpEmbeddingProvider",
    "LlmExchange",
    "LlmRequest",
    "MockChatProvider",
    "Mode",
    "ModelConfig",
    "PeerSet",
    "PipelineContext",
    "PrfScore",
    "PromptInstance",
    "PromptTemplate",
    "ResponseCache",
    "RiskBlock",
    "RiskItem",
    "RiskReport",
    "Stage",
    "TemplateSet",
    "VectorStore",
    "bert_score",
    "build_peer_blocks",
    "chunk_document",
    "cosine",
    "errors",
    "extract_company_risks",
    "ingest_document",
    "macro_average",
    "micro_average",
    "parse_risk_report",
    "render",
    "risk_query",
    "rouge_l",
    "rouge_n",
    "run_baseline",
    "run_contrastive",
    "score_report",
    "score_texts",
    "stage_model",
    "tokenize",
]
