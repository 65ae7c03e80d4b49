"""Freezes the shipped model's top ranks on a few fixed probe sentences.

Run once after training; the emitted JSON pins the weights' observable
behavior, so any later change to the fixture, the scoring path, or the
ordering rule fails the golden test instead of shipping silently. Probes are
kept only when the model is decisive about them (a clear logit gap around
the frozen cutoff), which keeps the pins stable against benign float noise.

    python3 bridge/scripts/freeze_golden_tops.py --model prose-small \
        --out bridge/tests/golden_tops.json
"""

from __future__ import annotations

import argparse
import json

import numpy as np

from llm_bridge.model import CausalScorer, load_model
from llm_bridge.ranking import RankingEngine
from llm_bridge.vocab import bundled_vocabulary, detokenize, tokenize

PROBES = [
    "She opened the door and",
    "We walked along the river",
    "The first frost of the ",
    "By the end of the ",
    "I carried the basket down to ",
    "The bees came back to the ",
    "Rain fell for most of the ",
    "He set the kettle on the ",
    "The path climbed away from the ",
    "In the last week of ",
]

TOP_KEEP = 5  # deepest prefix worth freezing
MIN_GAP = 0.25  # required logit drop across the frozen boundary


def decisive_depth(logits, order) -> int:
    """Deepest k <= TOP_KEEP whose boundary has a clear logit drop."""
    for k in range(TOP_KEEP, 0, -1):
        if float(logits[order[k - 1]] - logits[order[k]]) >= MIN_GAP:
            return k
    return 0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--cases", type=int, default=4)
    args = parser.parse_args()

    vocab = bundled_vocabulary()
    scorer = CausalScorer(load_model(args.model))
    engine = RankingEngine(scorer, top_m=len(vocab))

    cases = []
    for probe in PROBES:
        context = tuple(tokenize(probe.encode("utf-8"), vocab))
        logits = scorer.logits(context)
        order = engine.full_order(context)
        depth = decisive_depth(logits, order)
        top = order[:TOP_KEEP].tolist()
        rendering = [detokenize([t], vocab).decode("utf-8", "replace") for t in top]
        print(f"{probe!r}: top {rendering} decisive to {depth}")
        if depth == 0:
            print("  skipped: no boundary is clear enough")
            continue
        cases.append({"context": probe, "top_ids": top[:depth]})
        if len(cases) == args.cases:
            break

    if len(cases) < args.cases:
        raise SystemExit(f"only {len(cases)} decisive probes; add more candidates")
    payload = {"model": args.model, "top_keep": TOP_KEEP, "cases": cases}
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    print(f"wrote {args.out} with {len(cases)} cases")


if __name__ == "__main__":
    main()
