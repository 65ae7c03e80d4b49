"""Command-line entry point.

Subcommands: compress, decompress, train-bpe, bench, inspect. Containers are
written to a temporary file in the destination directory and renamed into
place only after all checks pass, so an interrupted run never leaves a
half-written output.

Exit codes: 0 success, 1 benchmark verification failure, 2 usage or I/O
error, 3 predictor transport failure, 4 fingerprint mismatch, 5 corrupt data.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile

from . import bench as bench_module
from .coders import CODER_NAMES, default_params
from .container import (
    SERIALIZATION_ASCII_DOT,
    SERIALIZATION_VARINT,
    read_container,
)
from .errors import (
    CorruptDataError,
    FingerprintMismatchError,
    TransportError,
    UsageError,
)
from .metrics import MetricsRecord, measure, timed
from .pipeline import CompressionSettings, compress_text, decompress_bytes
from .predictor import (
    DEFAULT_WINDOW,
    PredictorDescriptor,
    builtin_descriptor,
    external_descriptor,
)
from .tokenizer import load_vocabulary, save_vocabulary, train_bpe

_SERIALIZATIONS = (SERIALIZATION_VARINT, SERIALIZATION_ASCII_DOT)


def parse_predictor(
    name: str, window: int, batch_width: int
) -> PredictorDescriptor | None:
    if name == "none":
        return None
    if name.startswith("external:"):
        return external_descriptor(name[len("external:") :], window=window)
    match = re.fullmatch(r"builtin-k(\d+)", name)
    if match:
        return builtin_descriptor(
            order=int(match.group(1)),
            window=window,
            mode="batch" if batch_width > 1 else "individual",
            batch_width=batch_width,
        )
    raise UsageError(
        f"unknown predictor {name!r}; expected none, builtin-k<order>, "
        "or external:<host:port>"
    )


def parse_coder_spec(spec: str) -> tuple[str, tuple[int, ...] | None]:
    """A coder name with optional dash-joined integer parameters."""
    if spec in CODER_NAMES:
        return spec, None
    for name in sorted(CODER_NAMES, key=len, reverse=True):
        prefix = name + "-"
        if spec.startswith(prefix):
            fields = spec[len(prefix) :].split("-")
            if fields and all(f.isdigit() for f in fields):
                return name, tuple(int(f) for f in fields)
    raise UsageError(
        f"unknown coder {spec!r}; expected one of {', '.join(CODER_NAMES)} "
        "with optional -<param> suffixes"
    )


def parse_pipeline_spec(
    spec: str, window: int, batch_width: int
) -> bench_module.BenchPipeline:
    """Forms: 'coder', 'predictor+coder', 'predictor+coder+serialization'."""
    parts = spec.split("+")
    serialization = SERIALIZATION_VARINT
    if parts[-1] in _SERIALIZATIONS:
        serialization = parts.pop()
    if len(parts) == 1:
        predictor_part, coder_part = "none", parts[0]
    elif len(parts) == 2:
        predictor_part, coder_part = parts
    else:
        raise UsageError(f"cannot parse pipeline {spec!r}")
    predictor = parse_predictor(predictor_part, window, batch_width)
    coder_name, params = parse_coder_spec(coder_part)
    settings = CompressionSettings(
        predictor=predictor,
        coder_name=coder_name,
        coder_params=params,
        serialization=serialization,
    )
    return bench_module.plan_pipeline(settings)


def _coder_params_from_flags(
    coder_name: str, level: int | None, quality: int | None
) -> tuple[int, ...] | None:
    if level is not None and coder_name != "deflate":
        raise UsageError("--level applies only to the deflate coder")
    if quality is not None and coder_name != "brotli":
        raise UsageError("--quality applies only to the brotli coder")
    if coder_name == "deflate" and level is not None:
        return (level,)
    if coder_name == "brotli" and quality is not None:
        lgwin = default_params("brotli")[1]
        return (quality, lgwin)
    return None


def _write_atomic(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".rankzip-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def _print_metrics(record: MetricsRecord) -> None:
    print(
        f"uncompressed={record.uncompressed_size}B "
        f"compressed={record.compressed_size}B "
        f"ratio={record.ratio:.4f} bpc={record.bpc:.4f} "
        f"entropy={record.entropy:.4f} elapsed={record.elapsed:.3f}s",
        file=sys.stderr,
    )


def cmd_compress(args: argparse.Namespace) -> int:
    if args.predictor == "none" and args.serialization is not None:
        raise UsageError("--serialization has no meaning with --predictor none")
    serialization = args.serialization or SERIALIZATION_VARINT
    predictor = parse_predictor(args.predictor, args.window, args.batch_width)
    params = _coder_params_from_flags(args.coder, args.level, args.quality)
    settings = CompressionSettings(
        predictor=predictor,
        coder_name=args.coder,
        coder_params=params,
        serialization=serialization,
    )
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    with open(args.input, "r", encoding="utf-8") as fh:
        text = fh.read()
    compressed, elapsed = timed(lambda: compress_text(text, settings, vocab))
    output = args.output or args.input + ".azip"
    _write_atomic(output, compressed)
    _print_metrics(measure(text.encode("utf-8"), compressed, elapsed))
    return 0


def cmd_decompress(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    external_address = None
    if args.predictor and args.predictor.startswith("external:"):
        external_address = args.predictor[len("external:") :]
    text = decompress_bytes(
        data,
        vocab=vocab,
        window=args.window,
        batch_width=args.batch_width,
        external_address=external_address,
    )
    if args.output:
        output = args.output
    elif args.input.endswith(".azip"):
        output = args.input[: -len(".azip")]
    else:
        output = args.input + ".out"
    _write_atomic(output, text.encode("utf-8"))
    return 0


def cmd_train_bpe(args: argparse.Namespace) -> int:
    parts = []
    for path in args.inputs:
        with open(path, "rb") as fh:
            parts.append(fh.read())
    vocab = train_bpe(b"\n\n".join(parts), args.vocab_size)
    save_vocabulary(vocab, args.output)
    print(
        f"vocabulary: {len(vocab.entries)} entries, {len(vocab.merges)} merges, "
        f"fingerprint {vocab.fingerprint.hex()[:16]}",
        file=sys.stderr,
    )
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.pipeline:
        pipelines = tuple(
            parse_pipeline_spec(spec, args.window, args.batch_width)
            for spec in args.pipeline
        )
    else:
        pipelines = tuple(
            parse_pipeline_spec(spec, args.window, args.batch_width)
            for spec in (
                "none+deflate-9",
                "none+brotli-11-24",
                "builtin-k3+deflate-9",
                "builtin-k3+brotli-11-24",
            )
        )
    plan = bench_module.BenchPlan(
        inputs=tuple(args.inputs),
        pipelines=pipelines,
        truncate_chars=None if args.max_chars == 0 else args.max_chars,
        repetitions=args.repetitions,
        strip_gutenberg=args.strip_gutenberg_header,
    )
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    report = bench_module.run_plan(plan, vocab)
    rendered = bench_module.emit_report(report, args.format)
    if args.output:
        _write_atomic(args.output, rendered.encode("utf-8"))
    else:
        sys.stdout.write(rendered)
    return 0 if report.all_verified else 1


def cmd_inspect(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    header, payload = read_container(data)
    lines = [
        "container version: 1",
        f"mode: {header.mode}",
        f"coder: {header.coder_name}"
        + (f" params={','.join(str(p) for p in header.coder_params)}"
           if header.coder_params else ""),
    ]
    if header.mode == "rank":
        lines += [
            f"serialization: {header.serialization}",
            f"predictor: {header.predictor_id}",
            f"predictor fingerprint: {header.predictor_fingerprint.hex()}",
            f"vocabulary fingerprint: {header.vocab_fingerprint.hex()}",
            f"token count: {header.token_count}",
        ]
    lines += [
        f"original length: {header.original_length}",
        f"original crc32: {header.original_crc32:08x}",
        f"payload bytes: {len(payload)}",
    ]
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankzip",
        description="Lossless text compression through prediction ranks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_predictor_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--window", type=int, default=DEFAULT_WINDOW,
            help="context window in tokens (default %(default)s)",
        )
        p.add_argument(
            "--batch-width", type=int, default=1,
            help="tokens ranked per frozen model snapshot (default 1, individual)",
        )
        p.add_argument("--vocab", help="vocabulary file (.azvb)")

    p = sub.add_parser("compress", help="compress a text file into a container")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="defaults to INPUT.azip")
    p.add_argument(
        "--predictor", default="builtin-k3",
        help="none, builtin-k<order>, or external:<host:port> (default %(default)s)",
    )
    p.add_argument("--coder", default="deflate", choices=CODER_NAMES)
    p.add_argument(
        "--serialization", choices=_SERIALIZATIONS, default=None,
        help="rank stream encoding (default varint; invalid with --predictor none)",
    )
    p.add_argument("--level", type=int, help="deflate level 1..9 (default 9)")
    p.add_argument("--quality", type=int, help="brotli quality 0..11 (default 11)")
    add_predictor_flags(p)
    p.set_defaults(run=cmd_compress)

    p = sub.add_parser("decompress", help="restore the text from a container")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="defaults to INPUT without .azip")
    p.add_argument(
        "--predictor", default=None,
        help="override the external predictor address recorded in the container",
    )
    add_predictor_flags(p)
    p.set_defaults(run=cmd_decompress)

    p = sub.add_parser("train-bpe", help="train a merge vocabulary from text files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", required=True, help="vocabulary file to write")
    p.add_argument(
        "--vocab-size", type=int, default=4096,
        help="target entry count; training may stop earlier (default %(default)s)",
    )
    p.set_defaults(run=cmd_train_bpe)

    p = sub.add_parser("bench", help="benchmark pipelines over text files")
    p.add_argument("inputs", nargs="+", help="file paths or glob patterns")
    p.add_argument(
        "--pipeline", action="append",
        help="predictor+coder[+serialization], repeatable; "
        "default compares deflate/brotli with and without ranks",
    )
    p.add_argument(
        "--max-chars", type=int, default=10000,
        help="truncate inputs to this many characters; 0 disables (default %(default)s)",
    )
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--strip-gutenberg-header", action="store_true")
    p.add_argument("--format", choices=bench_module.REPORT_FORMATS, default="markdown")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    add_predictor_flags(p)
    p.set_defaults(run=cmd_bench)

    p = sub.add_parser("inspect", help="print container metadata without decoding")
    p.add_argument("input")
    p.set_defaults(run=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 3
    except FingerprintMismatchError as exc:
        print(f"fingerprint mismatch: {exc}", file=sys.stderr)
        return 4
    except CorruptDataError as exc:
        print(f"corrupt data: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except UnicodeDecodeError as exc:
        print(f"input is not valid utf-8: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
