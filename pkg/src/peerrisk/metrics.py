"""Self-implemented ROUGE-1/2/L and BERTScore, with macro/micro aggregation.

Tokens are lowercase alphanumeric runs; no stemming, stopword removal, IDF
weighting, or baseline rescaling. BERTScore uses greedy maximum-cosine
matching against a pluggable token embedder.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmbedderError, EmptyList, EmptyReference, InvalidParams

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class PrfScore:
    recall: float
    precision: float
    f1: float

    @staticmethod
    def from_pr(precision: float, recall: float) -> "PrfScore":
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return PrfScore(recall=recall, precision=precision, f1=f1)

    def to_dict(self) -> dict:
        return {"recall": self.recall, "precision": self.precision, "f1": self.f1}


@dataclass(frozen=True)
class EvalScores:
    rouge1: PrfScore
    rouge2: PrfScore
    rougeL: PrfScore
    bert: PrfScore

    def to_dict(self) -> dict:
        return {
            "rouge1": self.rouge1.to_dict(),
            "rouge2": self.rouge2.to_dict(),
            "rougeL": self.rougeL.to_dict(),
            "bert": self.bert.to_dict(),
        }

    def components(self) -> list[float]:
        out = []
        for prf in (self.rouge1, self.rouge2, self.rougeL, self.bert):
            out.extend((prf.recall, prf.precision, prf.f1))
        return out


# --- raw per-pair statistics (poolable for micro averaging) -------------------

@dataclass(frozen=True)
class PairStats:
    rouge1: tuple[int, int, int]  # clipped overlap, candidate n-grams, reference n-grams
    rouge2: tuple[int, int, int]
    rougeL: tuple[int, int, int]  # LCS length, |candidate|, |reference|
    bert: tuple[float, int, float, int]  # sum of ref-side maxima, |ref|, cand-side maxima, |cand|


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n_stats(candidate: list[str], reference: list[str], n: int) -> tuple[int, int, int]:
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    cand_counts = _ngram_counts(candidate, n)
    ref_counts = _ngram_counts(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return overlap, sum(cand_counts.values()), sum(ref_counts.values())


def _prf_from_triple(overlap: int, n_cand: int, n_ref: int) -> PrfScore:
    # f1 = 2pr/(p+r) simplifies to 2*overlap/(n_cand+n_ref); computing it from
    # the integer counts keeps exact-ratio cases exact.
    return PrfScore(
        recall=overlap / n_ref if n_ref else 0.0,
        precision=overlap / n_cand if n_cand else 0.0,
        f1=2 * overlap / (n_cand + n_ref) if overlap else 0.0,
    )


def rouge_n(candidate: list[str], reference: list[str], n: int) -> PrfScore:
    """Clipped n-gram overlap recall/precision/F1."""
    return _prf_from_triple(*rouge_n_stats(candidate, reference, n))


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b)) with a rolling row."""
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[len(b)]


def rouge_l_stats(candidate: list[str], reference: list[str]) -> tuple[int, int, int]:
    return lcs_length(candidate, reference), len(candidate), len(reference)


def rouge_l(candidate: list[str], reference: list[str]) -> PrfScore:
    """Longest-common-subsequence recall/precision/F1."""
    return _prf_from_triple(*rouge_l_stats(candidate, reference))


def _unit_rows(vectors: list[list[float]]) -> np.ndarray:
    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise DimensionMismatch(f"token vectors have mixed dims {sorted(lengths)}")
    arr = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms == 0.0):
        raise EmbedderError("embedder produced a zero-norm token vector")
    return arr / norms[:, None]


def bert_stats(candidate: list[str], reference: list[str], embedder) -> tuple[float, int, float, int]:
    if not candidate or not reference:
        return 0.0, len(reference), 0.0, len(candidate)
    cand_rows = _unit_rows(embedder.embed_batch(candidate))
    ref_rows = _unit_rows(embedder.embed_batch(reference))
    sim = np.clip(cand_rows @ ref_rows.T, -1.0, 1.0)
    # A negative best match carries no coverage signal; floor at 0 so scores
    # stay in [0, 1] for arbitrary embedders.
    best_per_cand = np.maximum(sim.max(axis=1), 0.0)
    best_per_ref = np.maximum(sim.max(axis=0), 0.0)
    return float(best_per_ref.sum()), len(reference), float(best_per_cand.sum()), len(candidate)


def bert_score(candidate: list[str], reference: list[str], embedder) -> PrfScore:
    """Greedy maximum-cosine token matching recall/precision/F1."""
    sum_ref, n_ref, sum_cand, n_cand = bert_stats(candidate, reference, embedder)
    return PrfScore.from_pr(
        precision=sum_cand / n_cand if n_cand else 0.0,
        recall=sum_ref / n_ref if n_ref else 0.0,
    )


def pair_stats(candidate: list[str], reference: list[str], embedder) -> PairStats:
    return PairStats(
        rouge1=rouge_n_stats(candidate, reference, 1),
        rouge2=rouge_n_stats(candidate, reference, 2),
        rougeL=rouge_l_stats(candidate, reference),
        bert=bert_stats(candidate, reference, embedder),
    )


def stats_to_scores(stats: PairStats) -> EvalScores:
    sum_ref, n_ref, sum_cand, n_cand = stats.bert
    return EvalScores(
        rouge1=_prf_from_triple(*stats.rouge1),
        rouge2=_prf_from_triple(*stats.rouge2),
        rougeL=_prf_from_triple(*stats.rougeL),
        bert=PrfScore.from_pr(
            precision=sum_cand / n_cand if n_cand else 0.0,
            recall=sum_ref / n_ref if n_ref else 0.0,
        ),
    )


def score_texts(candidate_text: str, reference_text: str, embedder) -> EvalScores:
    return stats_to_scores(pair_stats(tokenize(candidate_text), tokenize(reference_text), embedder))


def report_candidate_text(report, candidate_source: str = "full_text") -> str:
    """Candidate text to score: the full final-stage output or titles only."""
    if candidate_source == "full_text":
        return report.full_text
    if candidate_source == "titles":
        return "\n".join(item.title for item in report.items)
    raise InvalidParams(f"unknown candidate_source {candidate_source!r}")


def score_report(report, reference_text: str, embedder, candidate_source: str = "full_text") -> EvalScores:
    """Score one risk report against a reference text."""
    if not reference_text or not reference_text.strip():
        raise EmptyReference("reference text is empty")
    return score_texts(report_candidate_text(report, candidate_source), reference_text, embedder)


def macro_average(scores: list[EvalScores]) -> EvalScores:
    """Arithmetic mean of every component across reports."""
    if not scores:
        raise EmptyList("cannot average an empty score list")
    cols = list(zip(*(s.components() for s in scores)))
    means = [sum(col) / len(col) for col in cols]
    prfs = [
        PrfScore(recall=means[i], precision=means[i + 1], f1=means[i + 2]) for i in range(0, 12, 3)
    ]
    return EvalScores(rouge1=prfs[0], rouge2=prfs[1], rougeL=prfs[2], bert=prfs[3])


def micro_average(stats: list[PairStats]) -> EvalScores:
    """Pool raw counts across pairs, then compute each metric once."""
    if not stats:
        raise EmptyList("cannot average an empty stats list")

    def pool3(triples):
        return tuple(sum(t[i] for t in triples) for i in range(3))

    bert = tuple(sum(s.bert[i] for s in stats) for i in range(4))
    pooled = PairStats(
        rouge1=pool3([s.rouge1 for s in stats]),
        rouge2=pool3([s.rouge2 for s in stats]),
        rougeL=pool3([s.rougeL for s in stats]),
        bert=bert,
    )
    return stats_to_scores(pooled)
