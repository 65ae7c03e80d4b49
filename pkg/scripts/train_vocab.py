"""Regenerate the bundled English vocabulary fixture.

Trains the merge vocabulary on data/vocab_training.txt, prose kept separate
from the benchmark corpus so that ratio comparisons never train on their own
test data, and writes it where the package loads it from. Training is
deterministic, so rerunning this script reproduces the committed file
byte-for-byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from rankzip.tokenizer import save_vocabulary, train_bpe

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_SOURCE = REPO_ROOT / "data" / "vocab_training.txt"
DEFAULT_TARGET = REPO_ROOT / "src" / "rankzip" / "data" / "english.azvb"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--source", type=Path, default=DEFAULT_SOURCE)
    parser.add_argument("--target", type=Path, default=DEFAULT_TARGET)
    parser.add_argument(
        "--vocab-size",
        type=int,
        default=4096,
        help="upper bound; training stops when no pair repeats (default %(default)s)",
    )
    args = parser.parse_args()

    corpus = args.source.read_bytes()
    print(f"training on {len(corpus)} bytes from {args.source}", file=sys.stderr)
    vocab = train_bpe(corpus, args.vocab_size)
    args.target.parent.mkdir(parents=True, exist_ok=True)
    save_vocabulary(vocab, str(args.target))
    print(
        f"wrote {args.target}: {len(vocab.entries)} entries, "
        f"{len(vocab.merges)} merges, fingerprint {vocab.fingerprint.hex()}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
