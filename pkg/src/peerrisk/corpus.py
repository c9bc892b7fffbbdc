"""Filing and transcript ingestion, normalization, and word-window chunking."""

from __future__ import annotations

import json
import math
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path

from .errors import DecodeError, EmptyDocument, InvalidParams


class DocKind(str, Enum):
    TEN_K = "10-K"
    TEN_Q = "10-Q"
    TRANSCRIPT = "transcript"


@dataclass(frozen=True)
class Document:
    doc_id: str
    ticker: str
    company_name: str
    industry: str
    doc_kind: DocKind
    period: str
    text: str

    def __post_init__(self):
        if not self.text:
            raise EmptyDocument(f"document {self.doc_id!r} has empty text")
        if not self.ticker or self.ticker != self.ticker.upper():
            raise InvalidParams(f"ticker must be non-empty uppercase, got {self.ticker!r}")
        if not self.doc_id:
            raise InvalidParams("doc_id must be non-empty")


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    seq: int
    text: str
    start_word: int
    end_word: int

    @property
    def key(self) -> tuple[str, int]:
        return (self.doc_id, self.seq)


_SKIPPED_TAGS = {"script", "style"}


class _TextExtractor(HTMLParser):
    """Collects text nodes, decoding entities and dropping script/style bodies."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIPPED_TAGS:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in _SKIPPED_TAGS and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)


# Non-whitespace C0/C1 control characters; \t \n \r \v \f are left for the
# whitespace collapse below.
_CONTROL_RE = re.compile(r"[\x00-\x08\x0e-\x1f\x7f-\x9f]")
_WHITESPACE_RE = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """NFC-normalize, drop control characters, and collapse whitespace runs."""
    text = unicodedata.normalize("NFC", raw)
    text = _CONTROL_RE.sub(" ", text)
    return _WHITESPACE_RE.sub(" ", text).strip()


def strip_html(raw: str) -> str:
    """Extract visible text from markup; element boundaries become single spaces."""
    extractor = _TextExtractor()
    extractor.feed(raw)
    extractor.close()
    return " ".join(extractor.parts)


def ingest_document(raw_bytes: bytes, meta: dict) -> Document:
    """Decode one raw filing or transcript into a normalized Document.

    `meta` must carry doc_id, ticker, company_name, industry, doc_kind and
    period; values are copied verbatim. Raises DecodeError for non-UTF-8
    input and EmptyDocument when nothing survives normalization.
    """
    try:
        raw = raw_bytes.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"input is not valid UTF-8: {exc}") from exc
    text = normalize_text(strip_html(raw))
    if not text:
        raise EmptyDocument("normalization produced empty text")
    return Document(
        doc_id=meta["doc_id"],
        ticker=meta["ticker"],
        company_name=meta["company_name"],
        industry=meta["industry"],
        doc_kind=DocKind(meta["doc_kind"]),
        period=meta["period"],
        text=text,
    )


def chunk_document(doc: Document, size_words: int, overlap_words: int) -> list[Chunk]:
    """Split a document into word windows of `size_words` with the given overlap.

    Window i starts at word i * (size_words - overlap_words); the final
    window is truncated at the document end and may be shorter.
    """
    if size_words <= 0:
        raise InvalidParams(f"size_words must be positive, got {size_words}")
    if overlap_words < 0 or overlap_words >= size_words:
        raise InvalidParams(
            f"overlap_words must satisfy 0 <= overlap < size, got overlap={overlap_words} size={size_words}"
        )
    words = doc.text.split()
    stride = size_words - overlap_words
    count = math.ceil(max(len(words) - overlap_words, 1) / stride)
    chunks = []
    for i in range(count):
        start = i * stride
        end = min(start + size_words, len(words))
        chunks.append(
            Chunk(doc_id=doc.doc_id, seq=i, text=" ".join(words[start:end]), start_word=start, end_word=end)
        )
    return chunks


# --- corpus manifest ----------------------------------------------------------

_MANIFEST_KEYS = ("doc_id", "ticker", "company_name", "industry", "doc_kind", "period", "path")


@dataclass(frozen=True)
class ManifestEntry:
    doc_id: str
    ticker: str
    company_name: str
    industry: str
    doc_kind: DocKind
    period: str
    path: str


def load_manifest(path: Path) -> list[ManifestEntry]:
    """Read a JSON Lines corpus manifest; tickers are uppercased on load."""
    entries = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            missing = [k for k in _MANIFEST_KEYS if k not in row]
            if missing:
                raise InvalidParams(f"{path}:{lineno}: manifest row missing keys {missing}")
            entries.append(
                ManifestEntry(
                    doc_id=row["doc_id"],
                    ticker=str(row["ticker"]).upper(),
                    company_name=row["company_name"],
                    industry=row["industry"],
                    doc_kind=DocKind(row["doc_kind"]),
                    period=row["period"],
                    path=row["path"],
                )
            )
    seen: set[str] = set()
    for e in entries:
        if e.doc_id in seen:
            raise InvalidParams(f"duplicate doc_id in manifest: {e.doc_id!r}")
        seen.add(e.doc_id)
    return entries


def ingest_entry(entry: ManifestEntry, base_dir: Path) -> Document:
    """Read and ingest the raw file behind one manifest entry."""
    raw_path = Path(entry.path)
    if not raw_path.is_absolute():
        raw_path = Path(base_dir) / raw_path
    return ingest_document(
        raw_path.read_bytes(),
        {
            "doc_id": entry.doc_id,
            "ticker": entry.ticker,
            "company_name": entry.company_name,
            "industry": entry.industry,
            "doc_kind": entry.doc_kind,
            "period": entry.period,
        },
    )


class Corpus:
    """Manifest-backed view of the document set, indexed by ticker."""

    def __init__(self, entries: list[ManifestEntry]):
        self.entries = list(entries)
        self._by_ticker: dict[str, list[ManifestEntry]] = {}
        for e in self.entries:
            self._by_ticker.setdefault(e.ticker, []).append(e)

    def tickers(self) -> list[str]:
        return sorted(self._by_ticker)

    def has_ticker(self, ticker: str) -> bool:
        return ticker in self._by_ticker

    def company(self, ticker: str) -> ManifestEntry | None:
        """First manifest entry for the ticker; carries the company metadata."""
        docs = self._by_ticker.get(ticker)
        return docs[0] if docs else None

    def doc_ids(self, ticker: str, kinds: tuple[DocKind, ...] | None = None) -> set[str]:
        docs = self._by_ticker.get(ticker, [])
        return {e.doc_id for e in docs if kinds is None or e.doc_kind in kinds}


# --- chunk store ----------------------------------------------------------------

def save_chunks(chunks: list[Chunk], path: Path) -> None:
    """Write chunks as JSON Lines (one object per chunk)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for c in chunks:
            fh.write(
                json.dumps(
                    {
                        "doc_id": c.doc_id,
                        "seq": c.seq,
                        "text": c.text,
                        "start_word": c.start_word,
                        "end_word": c.end_word,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_chunks(path: Path) -> list[Chunk]:
    chunks = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            chunks.append(
                Chunk(
                    doc_id=row["doc_id"],
                    seq=row["seq"],
                    text=row["text"],
                    start_word=row["start_word"],
                    end_word=row["end_word"],
                )
            )
    return chunks
