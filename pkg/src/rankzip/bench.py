"""Benchmark harness: run pipelines over text files and tabulate the results.

Every measurement is round-trip verified before its numbers count: the
container is decompressed and compared byte-for-byte against the input text,
and a pipeline that fails produces a FAILED row instead of numbers. Inputs
are file paths or glob patterns, truncated to the first N Unicode scalar
values (default 10000) before compression. With repetitions > 1 the elapsed
column is the median over runs; sizes and ratios are checked identical across
runs, which they must be since every pipeline is deterministic.

Reports render as CSV, Markdown, or JSON with one row per (input, pipeline)
pair, aggregate mean rows per pipeline, and footer notes recording the
conventions (byte-histogram entropy, handshake excluded from timing).
"""

from __future__ import annotations

import glob
import json
import re
import statistics
from dataclasses import dataclass

from .errors import RankzipError, UsageError
from .metrics import MetricsRecord, measure, timed
from .pipeline import CompressionSettings, compress_text, decompress_bytes
from .tokenizer import Vocabulary

REPORT_FORMATS = ("csv", "markdown", "json")

_COLUMNS = (
    "input",
    "pipeline",
    "uncompressed",
    "compressed",
    "ratio",
    "bpc",
    "entropy",
    "elapsed",
    "status",
)

_GUTENBERG_START = re.compile(r"\*\*\*\s*START OF.*?\*\*\*", re.IGNORECASE)
_GUTENBERG_END = re.compile(r"\*\*\*\s*END OF.*?\*\*\*", re.IGNORECASE)

_STANDING_NOTES = (
    "entropy is computed over the byte histogram of the truncated input",
    "elapsed covers compression only; external predictor handshakes happen "
    "before the clock starts",
)

BENCH_REPORT_SCHEMA = {
    "type": "object",
    "required": ["rows", "aggregates", "notes"],
    "properties": {
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(_COLUMNS),
                "properties": {
                    "input": {"type": "string"},
                    "pipeline": {"type": "string"},
                    "uncompressed": {"type": ["integer", "null"]},
                    "compressed": {"type": ["integer", "null"]},
                    "ratio": {"type": ["number", "null"]},
                    "bpc": {"type": ["number", "null"]},
                    "entropy": {"type": ["number", "null"]},
                    "elapsed": {"type": ["number", "null"]},
                    "status": {"enum": ["ok", "failed"]},
                },
            },
        },
        "aggregates": {"type": "array"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


def pipeline_label(settings: CompressionSettings) -> str:
    coder = settings.coder_name
    if settings.coder_params:
        coder += "-" + "-".join(str(p) for p in settings.coder_params)
    if settings.predictor is None:
        return coder
    label = f"rank({settings.predictor.id})+{coder}"
    if settings.serialization != "varint":
        label += f"+{settings.serialization}"
    return label


@dataclass(frozen=True)
class BenchPipeline:
    label: str
    settings: CompressionSettings


def plan_pipeline(
    settings: CompressionSettings, label: str | None = None
) -> BenchPipeline:
    return BenchPipeline(label=label or pipeline_label(settings), settings=settings)


@dataclass(frozen=True)
class BenchPlan:
    inputs: tuple[str, ...]  # file paths or glob patterns
    pipelines: tuple[BenchPipeline, ...]
    truncate_chars: int | None = 10000
    repetitions: int = 1
    strip_gutenberg: bool = False

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise UsageError("repetitions must be at least 1")
        if self.truncate_chars is not None and self.truncate_chars < 0:
            raise UsageError("character limit must be non-negative")


@dataclass(frozen=True)
class BenchRow:
    input_name: str
    pipeline: str
    status: str  # "ok" or "failed"
    record: MetricsRecord | None = None
    error: str = ""


@dataclass(frozen=True)
class Report:
    rows: tuple[BenchRow, ...]
    notes: tuple[str, ...]

    @property
    def all_verified(self) -> bool:
        return all(row.status == "ok" for row in self.rows)

    def aggregates(self) -> list[dict[str, object]]:
        """Mean of every numeric column per pipeline, over verified rows."""
        by_pipeline: dict[str, list[MetricsRecord]] = {}
        for row in self.rows:
            if row.status == "ok" and row.record is not None:
                by_pipeline.setdefault(row.pipeline, []).append(row.record)
        result = []
        for pipeline, records in by_pipeline.items():
            result.append(
                {
                    "input": "(mean)",
                    "pipeline": pipeline,
                    "uncompressed": statistics.mean(
                        r.uncompressed_size for r in records
                    ),
                    "compressed": statistics.mean(r.compressed_size for r in records),
                    "ratio": statistics.mean(r.ratio for r in records),
                    "bpc": statistics.mean(r.bpc for r in records),
                    "entropy": statistics.mean(r.entropy for r in records),
                    "elapsed": statistics.mean(r.elapsed for r in records),
                    "status": "ok",
                }
            )
        return result


def expand_inputs(patterns: tuple[str, ...]) -> tuple[list[str], list[str]]:
    """Resolve globs to sorted paths; unmatched patterns come back as errors."""
    paths: list[str] = []
    errors: list[str] = []
    for pattern in patterns:
        matched = sorted(glob.glob(pattern))
        if matched:
            paths.extend(matched)
        else:
            errors.append(f"no input matches {pattern!r}")
    return paths, errors


def load_input(
    path: str, truncate_chars: int | None, strip_gutenberg: bool
) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if strip_gutenberg:
        text = strip_gutenberg_header(text)
    return truncate_scalars(text, truncate_chars)


def run_plan(plan: BenchPlan, vocab: Vocabulary | None = None) -> Report:
    paths, notes = expand_inputs(plan.inputs)
    rows: list[BenchRow] = []
    for path in paths:
        try:
            text = load_input(path, plan.truncate_chars, plan.strip_gutenberg)
        except (OSError, UnicodeDecodeError) as exc:
            notes.append(f"skipped {path}: {exc}")
            continue
        original = text.encode("utf-8")
        for bench_pipeline in plan.pipelines:
            rows.append(
                _run_one(path, text, original, bench_pipeline, plan.repetitions, vocab)
            )
    return Report(rows=tuple(rows), notes=tuple(notes) + _STANDING_NOTES)


def _run_one(
    path: str,
    text: str,
    original: bytes,
    bench_pipeline: BenchPipeline,
    repetitions: int,
    vocab: Vocabulary | None,
) -> BenchRow:
    settings = bench_pipeline.settings
    try:
        timings = []
        compressed = b""
        for _ in range(repetitions):
            compressed, elapsed = timed(lambda: compress_text(text, settings, vocab))
            timings.append(elapsed)
        descriptor = settings.predictor
        restored = decompress_bytes(
            compressed,
            vocab=vocab,
            window=descriptor.window if descriptor else 100,
            batch_width=descriptor.batch_width if descriptor else 1,
        )
        if restored != text:
            raise RankzipError("round trip produced different text")
    except RankzipError as exc:
        return BenchRow(
            input_name=path,
            pipeline=bench_pipeline.label,
            status="failed",
            error=str(exc),
        )
    return BenchRow(
        input_name=path,
        pipeline=bench_pipeline.label,
        status="ok",
        record=measure(original, compressed, statistics.median(timings)),
    )


def _row_cells(row: BenchRow) -> dict[str, object]:
    if row.record is None:
        return {
            "input": row.input_name,
            "pipeline": row.pipeline,
            "uncompressed": None,
            "compressed": None,
            "ratio": None,
            "bpc": None,
            "entropy": None,
            "elapsed": None,
            "status": "failed",
        }
    r = row.record
    return {
        "input": row.input_name,
        "pipeline": row.pipeline,
        "uncompressed": r.uncompressed_size,
        "compressed": r.compressed_size,
        "ratio": round(r.ratio, 6),
        "bpc": round(r.bpc, 6),
        "entropy": round(r.entropy, 6),
        "elapsed": round(r.elapsed, 4),
        "status": "ok",
    }


def _render_cell(value: object) -> str:
    if value is None:
        return "FAILED"
    if isinstance(value, float):
        return f"{value:.6f}".rstrip("0").rstrip(".")
    return str(value)


def emit_report(report: Report, fmt: str) -> str:
    if fmt not in REPORT_FORMATS:
        raise UsageError(
            f"unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}"
        )
    rows = [_row_cells(row) for row in report.rows]
    aggregates = report.aggregates()
    if fmt == "json":
        payload = {
            "rows": rows,
            "aggregates": aggregates,
            "notes": list(report.notes),
        }
        return json.dumps(payload, indent=2) + "\n"
    table = rows + aggregates
    if fmt == "csv":
        lines = [",".join(_COLUMNS)]
        for row in table:
            lines.append(
                ",".join(_render_cell(row[column]) for column in _COLUMNS)
            )
        return "\n".join(lines) + "\n"
    cells = [[_render_cell(row[column]) for column in _COLUMNS] for row in table]
    widths = [
        max([len(column)] + [len(line[i]) for line in cells])
        for i, column in enumerate(_COLUMNS)
    ]
    header = "| " + " | ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths)) + " |"
    rule = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    lines = [header, rule]
    for line in cells:
        lines.append("| " + " | ".join(v.ljust(w) for v, w in zip(line, widths)) + " |")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def strip_gutenberg_header(text: str) -> str:
    """Drop boilerplate around the body when start/end markers are present."""
    start_match = _GUTENBERG_START.search(text)
    if start_match:
        newline = text.find("\n", start_match.end())
        text = text[newline + 1 :] if newline != -1 else ""
    end_match = _GUTENBERG_END.search(text)
    if end_match:
        newline = text.rfind("\n", 0, end_match.start())
        text = text[:newline] if newline != -1 else text[: end_match.start()]
    return text


def truncate_scalars(text: str, max_chars: int | None) -> str:
    """Keep the first max_chars Unicode scalar values."""
    if max_chars is None:
        return text
    if max_chars < 0:
        raise UsageError("character limit must be non-negative")
    return text[:max_chars]
