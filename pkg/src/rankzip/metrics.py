"""Compression quality and timing metrics.

Conventions: ratio is uncompressed/compressed (larger is better); bpc treats
one character as one byte, with a separate bits-per-Unicode-scalar figure for
multi-byte text; entropy is computed over the byte histogram.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable, TypeVar

from .errors import UsageError

T = TypeVar("T")


@dataclass(frozen=True)
class MetricsRecord:
    uncompressed_size: int
    compressed_size: int
    ratio: float
    bpc: float
    entropy: float
    elapsed: float
    char_count: int


def compression_ratio(uncompressed_size: int, compressed_size: int) -> float:
    if compressed_size == 0:
        raise UsageError("compressed size is zero; ratio undefined")
    return uncompressed_size / compressed_size


def bits_per_character(compressed_size: int, char_count: int) -> float:
    if char_count == 0:
        raise UsageError("character count is zero; bpc undefined")
    return 8.0 * compressed_size / char_count


def shannon_entropy(data: bytes) -> float:
    if len(data) == 0:
        raise UsageError("entropy of empty input is undefined")
    n = len(data)
    counts = Counter(data)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def timed(op: Callable[[], T]) -> tuple[T, float]:
    start = time.perf_counter()
    result = op()
    return result, time.perf_counter() - start


def measure(original: bytes, compressed: bytes, elapsed: float) -> MetricsRecord:
    """Assemble a full record for one (input, pipeline) run."""
    return MetricsRecord(
        uncompressed_size=len(original),
        compressed_size=len(compressed),
        ratio=compression_ratio(len(original), len(compressed)),
        bpc=bits_per_character(len(compressed), len(original)) if original else 0.0,
        entropy=shannon_entropy(original) if original else 0.0,
        elapsed=elapsed,
        char_count=unicode_scalar_count(original),
    )


def unicode_scalar_count(data: bytes) -> int:
    """Number of Unicode scalar values, with lone bytes counted singly."""
    return len(data.decode("utf-8", errors="surrogateescape"))
