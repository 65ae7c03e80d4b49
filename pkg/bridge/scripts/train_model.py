"""Trains the bundled ranking model and writes its fixture.

The corpus is every prose file under the repository's training locations;
the held-out evaluation document never appears here. The last slice of the
token stream is kept aside for validation, the best validation checkpoint is
the one that ships, and a fixed seed makes a rerun on the same machine
reproduce the same fixture.

Run from the repository root:

    python3 bridge/scripts/train_model.py --kind lstm --out bridge/src/llm_bridge/fixtures/prose-small.pt
"""

from __future__ import annotations

import argparse
import copy
import glob
import math
import time
from collections import Counter
from pathlib import Path

import torch
import torch.nn.functional as F

from llm_bridge.model import build_model, save_fixture
from llm_bridge.vocab import bundled_vocabulary, tokenize

WINDOW = 128  # deepest context, in tokens, a serving query may carry
BLOCK = WINDOW + 1  # training crop length: every context depth 0..WINDOW occurs

TRAIN_SOURCES = [
    "data/vocab_training.txt",
    "corpus/clockmaker.txt",
    "corpus/harbor_winter.txt",
    "corpus/high_passes.txt",
    "corpus/island_letters.txt",
    "corpus/parish_chronicle.txt",
    "corpus/river_walk.txt",
]
TRAIN_GLOB = "bridge/data/train/*.txt"


def load_token_stream(root: Path, vocab) -> list[int]:
    paths = [root / name for name in TRAIN_SOURCES]
    paths += sorted(root.glob(TRAIN_GLOB))
    blob = b"\n\n".join(path.read_bytes() for path in paths)
    return tokenize(blob, vocab)


def make_batch(ids: torch.Tensor, batch: int, begin: int, generator) -> tuple[torch.Tensor, torch.Tensor]:
    starts = torch.randint(0, len(ids) - BLOCK, (batch,), generator=generator)
    crops = torch.stack([ids[s : s + BLOCK] for s in starts])
    bos = torch.full((batch, 1), begin, dtype=torch.long)
    inputs = torch.cat([bos, crops[:, :-1]], dim=1)
    return inputs, crops


def validation_bits(model, ids: torch.Tensor, begin: int) -> float:
    """Mean bits per token over sequential crops of the validation slice."""
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(ids) - BLOCK + 1, BLOCK):
            crop = ids[start : start + BLOCK].unsqueeze(0)
            bos = torch.full((1, 1), begin, dtype=torch.long)
            inputs = torch.cat([bos, crop[:, :-1]], dim=1)
            logits = model(inputs)
            loss = F.cross_entropy(
                logits.reshape(-1, logits.shape[-1]), crop.reshape(-1), reduction="sum"
            )
            total += loss.item()
            count += crop.numel()
    model.train()
    return total / count / math.log(2)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", choices=["lstm", "transformer"], default="lstm")
    parser.add_argument("--embed-dim", type=int, default=256)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--dropout", type=float, default=0.3)
    parser.add_argument("--steps", type=int, default=2500)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--lr", type=float, default=2e-3)
    parser.add_argument("--val-tokens", type=int, default=9000)
    parser.add_argument("--val-every", type=int, default=250)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--out", required=True, help="fixture path to write")
    args = parser.parse_args()

    torch.manual_seed(args.seed)
    torch.set_num_threads(args.threads)
    root = Path(__file__).resolve().parents[2]

    vocab = bundled_vocabulary()
    stream = load_token_stream(root, vocab)
    train_ids = torch.tensor(stream[: -args.val_tokens], dtype=torch.long)
    val_ids = torch.tensor(stream[-args.val_tokens :], dtype=torch.long)
    print(f"vocab {len(vocab)}, train {len(train_ids)} tokens, val {len(val_ids)} tokens", flush=True)

    config = {
        "kind": args.kind,
        "vocab_size": len(vocab),
        "window": WINDOW,
        "embed_dim": args.embed_dim,
        "layers": args.layers,
        "dropout": args.dropout,
        "vocab_fingerprint": vocab.fingerprint.hex(),
    }
    if args.kind == "transformer":
        config["heads"] = args.heads
    model = build_model(config)

    # Start the output bias at the training unigram log-frequencies so early
    # steps rank by frequency instead of noise.
    frequencies = torch.zeros(len(vocab))
    for token, count in Counter(train_ids.tolist()).items():
        frequencies[token] = count
    with torch.no_grad():
        model.out_bias.copy_(torch.log((frequencies + 1.0) / (len(train_ids) + len(vocab))))

    parameter_count = sum(p.numel() for p in model.parameters())
    print(f"{args.kind} model, {parameter_count:,} parameters", flush=True)

    generator = torch.Generator().manual_seed(args.seed)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=args.lr, weight_decay=0.05, betas=(0.9, 0.98)
    )
    schedule = torch.optim.lr_scheduler.OneCycleLR(
        optimizer, max_lr=args.lr, total_steps=args.steps, pct_start=0.1
    )

    begin = len(vocab)
    best_bits = float("inf")
    best_state = None
    started = time.time()
    model.train()
    for step in range(1, args.steps + 1):
        inputs, targets = make_batch(train_ids, args.batch, begin, generator)
        logits = model(inputs)
        loss = F.cross_entropy(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1))
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
        optimizer.step()
        schedule.step()
        if step % args.val_every == 0 or step == args.steps:
            bits = validation_bits(model, val_ids, begin)
            marker = ""
            if bits < best_bits:
                best_bits = bits
                best_state = copy.deepcopy(model.state_dict())
                marker = " *"
            elapsed = time.time() - started
            print(
                f"step {step} train {loss.item() / math.log(2):.3f}b "
                f"val {bits:.3f}b {elapsed:.0f}s{marker}",
                flush=True,
            )

    assert best_state is not None
    revision = save_fixture(args.out, config, best_state)
    print(f"saved {args.out} revision {revision} (val {best_bits:.3f} bits/token)", flush=True)


if __name__ == "__main__":
    main()
