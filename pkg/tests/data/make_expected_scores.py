"""Regenerates expected_scores.json from the oracle implementations only.

Run from the tests/ directory: python data/make_expected_scores.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from oracles import oracle_bert, oracle_rouge_l, oracle_rouge_n, oracle_tokenize  # noqa: E402

from peerrisk.embedding import HashedBagOfWordsEmbedder  # noqa: E402

CANDIDATE = (
    "1. Tariff Exposure — revenue concentrated in regions facing new tariff policy.\n"
    "2. Supplier Dependence — two suppliers provide most drilling components.\n"
    "3. FX Sensitivity — earnings correlate with euro and peso movements."
)
REFERENCE = (
    "Analyst view: the company faces tariff policy risk in key regions, heavy dependence "
    "on two component suppliers, and notable currency sensitivity to the euro. Margin "
    "pressure from competitive pricing is a secondary concern."
)
DIMS = 32


def main() -> None:
    cand = oracle_tokenize(CANDIDATE)
    ref = oracle_tokenize(REFERENCE)
    embedder = HashedBagOfWordsEmbedder(dims=DIMS)
    scores = {
        "rouge1": oracle_rouge_n(cand, ref, 1),
        "rouge2": oracle_rouge_n(cand, ref, 2),
        "rougeL": oracle_rouge_l(cand, ref),
        "bert": oracle_bert(cand, ref, lambda t: embedder.embed_batch([t])[0]),
    }
    out = Path(__file__).parent / "expected_scores.json"
    out.write_text(
        json.dumps(
            {
                "candidate": CANDIDATE,
                "reference": REFERENCE,
                "embedder_dims": DIMS,
                "scores": scores,
            },
            indent=2,
        )
        + "\n"
    )
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
