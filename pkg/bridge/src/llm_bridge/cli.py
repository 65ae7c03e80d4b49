"""Command-line entry points: serve rankings over TCP, or rank a file offline.

``rank-file`` walks a file token by token, asking the same scoring code the
server uses for each rank, and writes the ranks as unsigned LEB128 varints.
Driving the live server with the compression toolkit over the same file must
produce this exact byte sequence, which makes the two implementations
cross-checkable.
"""

from __future__ import annotations

import argparse
import sys
from collections import deque

from .model import CausalScorer, ModelFixtureError, load_model
from .ranking import RankingEngine
from .server import DEFAULT_TOP_M, serve
from .vocab import bundled_vocabulary, tokenize

# Matches the compressing client's default context depth so offline dumps
# line up with live encodes out of the box.
DEFAULT_QUERY_WINDOW = 100


def _varint(value: int) -> bytes:
    out = bytearray()
    while True:
        low = value & 0x7F
        value >>= 7
        if value:
            out.append(low | 0x80)
        else:
            out.append(low)
            return bytes(out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llm-bridge",
        description="Next-token ranking server backed by a small causal language model.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    serve_cmd = commands.add_parser("serve", help="answer ranking queries over TCP")
    serve_cmd.add_argument("--model", required=True, help="model fixture name or path")
    serve_cmd.add_argument("--addr", required=True, help="host:port to listen on")
    serve_cmd.add_argument(
        "--top-m",
        type=int,
        default=DEFAULT_TOP_M,
        help="explicit ranks per reply (default %(default)s, capped at vocabulary size)",
    )

    rank_cmd = commands.add_parser(
        "rank-file", help="write a file's rank stream as varints"
    )
    rank_cmd.add_argument("path", help="file to rank")
    rank_cmd.add_argument("--model", required=True, help="model fixture name or path")
    rank_cmd.add_argument(
        "--top-m",
        type=int,
        default=DEFAULT_TOP_M,
        help="explicit ranks per reply (default %(default)s, capped at vocabulary size)",
    )
    rank_cmd.add_argument(
        "--window",
        type=int,
        default=DEFAULT_QUERY_WINDOW,
        help="context tokens per query, matching the encoding client (default %(default)s)",
    )
    rank_cmd.add_argument(
        "--output", default="-", help="output file, '-' for stdout (default)"
    )
    return parser


def _run_serve(args: argparse.Namespace) -> int:
    try:
        serve(args.addr, args.model, top_m=args.top_m)
    except KeyboardInterrupt:
        return 0
    except (ModelFixtureError, ValueError, OSError) as exc:
        print(f"llm-bridge: {exc}", file=sys.stderr)
        return 1
    return 0


def _run_rank_file(args: argparse.Namespace) -> int:
    try:
        with open(args.path, "rb") as handle:
            data = handle.read()
    except OSError as exc:
        print(f"llm-bridge: cannot read {args.path}: {exc}", file=sys.stderr)
        return 1
    try:
        vocab = bundled_vocabulary()
        loaded = load_model(args.model)
        if loaded.config.get("vocab_fingerprint") != vocab.fingerprint.hex():
            raise ModelFixtureError(
                f"model {args.model!r} was trained against a different vocabulary"
            )
        engine = RankingEngine(CausalScorer(loaded), top_m=args.top_m)
        out = bytearray()
        context: deque[int] = deque(maxlen=args.window)
        for token in tokenize(data, vocab):
            out += _varint(engine.rank_of(tuple(context), token))
            context.append(token)
    except (ModelFixtureError, ValueError) as exc:
        print(f"llm-bridge: {exc}", file=sys.stderr)
        return 1
    if args.output == "-":
        sys.stdout.buffer.write(bytes(out))
        sys.stdout.buffer.flush()
    else:
        try:
            with open(args.output, "wb") as handle:
                handle.write(bytes(out))
        except OSError as exc:
            print(f"llm-bridge: cannot write {args.output}: {exc}", file=sys.stderr)
            return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        return _run_serve(args)
    return _run_rank_file(args)


if __name__ == "__main__":
    raise SystemExit(main())
