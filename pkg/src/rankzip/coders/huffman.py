"""Static Huffman coder with canonical codes.

The stream is self-contained: a 4-byte magic and version byte, an 8-byte
symbol count, 256 code-length bytes, then the payload bits MSB-first. Code
lengths come from the classic two-node merge; codes are assigned canonically
(by length, then symbol) so the decoder rebuilds them from lengths alone. A
single distinct symbol degenerates to a 1-bit code.
"""

from __future__ import annotations

import heapq
import struct

import numpy as np

from .._fast import kernel
from ..errors import CorruptDataError

STREAM_MAGIC = b"AZHF"
STREAM_VERSION = 1

_HEADER = struct.Struct("<Q")


def code_lengths(frequencies: list[int]) -> list[int]:
    """Optimal prefix-code lengths for a 256-entry frequency table."""
    present = [(f, s) for s, f in enumerate(frequencies) if f > 0]
    if not present:
        return [0] * 256
    if len(present) == 1:
        lengths = [0] * 256
        lengths[present[0][1]] = 1
        return lengths
    # Heap entries carry a serial so comparisons never reach the symbol lists.
    heap = [(f, serial, [s]) for serial, (f, s) in enumerate(present)]
    heapq.heapify(heap)
    serial = len(heap)
    depths = [0] * 256
    while len(heap) > 1:
        fa, _, sa = heapq.heappop(heap)
        fb, _, sb = heapq.heappop(heap)
        for s in sa:
            depths[s] += 1
        for s in sb:
            depths[s] += 1
        heapq.heappush(heap, (fa + fb, serial, sa + sb))
        serial += 1
    return depths


def canonical_codes(lengths: list[int]) -> list[tuple[int, int]]:
    """(code, length) per symbol; shorter codes first, ties by symbol id."""
    codes = [(0, 0)] * 256
    code = 0
    previous_length = 0
    for length, symbol in sorted(
        (l, s) for s, l in enumerate(lengths) if l > 0
    ):
        code <<= length - previous_length
        codes[symbol] = (code, length)
        code += 1
        previous_length = length
    return codes


@kernel
def _pack_bits(data, code_values, code_widths, out):
    bit_buffer = np.int64(0)
    bit_count = np.int64(0)
    position = np.int64(0)
    for i in range(data.shape[0]):
        symbol = data[i]
        width = code_widths[symbol]
        value = code_values[symbol]
        for b in range(width - 1, -1, -1):
            bit_buffer = (bit_buffer << 1) | ((value >> b) & 1)
            bit_count += 1
            if bit_count == 8:
                out[position] = bit_buffer
                position += 1
                bit_buffer = np.int64(0)
                bit_count = np.int64(0)
    if bit_count > 0:
        out[position] = bit_buffer << (8 - bit_count)
        position += 1
    return position


@kernel
def _unpack_bits(payload, count, first_code, first_index, length_counts, ordered_symbols, out):
    # Canonical decode: extend the code one bit at a time until it falls into
    # the populated window of some length.
    bit_position = np.int64(0)
    total_bits = np.int64(payload.shape[0]) * 8
    for i in range(count):
        code = np.int64(0)
        length = np.int64(0)
        while True:
            if bit_position >= total_bits:
                return np.int64(i)
            byte = payload[bit_position >> 3]
            bit = (byte >> (7 - (bit_position & 7))) & 1
            bit_position += 1
            code = (code << 1) | bit
            length += 1
            if length > 255:
                return np.int64(i)
            offset = code - first_code[length]
            if offset >= 0 and offset < length_counts[length]:
                out[i] = ordered_symbols[first_index[length] + offset]
                break
    return np.int64(-1)


def compress(data: bytes) -> bytes:
    frequencies = [0] * 256
    for byte in data:
        frequencies[byte] += 1
    lengths = code_lengths(frequencies)
    codes = canonical_codes(lengths)
    header = (
        STREAM_MAGIC
        + bytes([STREAM_VERSION])
        + _HEADER.pack(len(data))
        + bytes(lengths)
    )
    if not data:
        return header
    code_values = np.array([c for c, _ in codes], dtype=np.int64)
    code_widths = np.array([w for _, w in codes], dtype=np.int64)
    total_bits = sum(lengths[b] for b in data)
    out = np.zeros((total_bits + 7) // 8, dtype=np.uint8)
    used = _pack_bits(
        np.frombuffer(data, dtype=np.uint8), code_values, code_widths, out
    )
    return header + out[: int(used)].tobytes()


def decompress(data: bytes) -> bytes:
    if len(data) < 5 + _HEADER.size + 256:
        raise CorruptDataError("huffman stream shorter than its header")
    if data[:4] != STREAM_MAGIC:
        raise CorruptDataError("not a huffman stream (bad magic)")
    if data[4] != STREAM_VERSION:
        raise CorruptDataError(f"unsupported huffman stream version {data[4]}")
    (count,) = _HEADER.unpack_from(data, 5)
    lengths = list(data[5 + _HEADER.size : 5 + _HEADER.size + 256])
    payload = data[5 + _HEADER.size + 256 :]
    if count == 0:
        return b""
    if all(l == 0 for l in lengths):
        raise CorruptDataError("huffman stream declares symbols but no codes")
    # Canonical tables indexed by length 0..255.
    pairs = sorted((l, s) for s, l in enumerate(lengths) if l > 0)
    ordered_symbols = np.array([s for _, s in pairs], dtype=np.int64)
    length_counts = np.zeros(256, dtype=np.int64)
    for l, _ in pairs:
        length_counts[l] += 1
    first_code = np.zeros(257, dtype=np.int64)
    first_index = np.zeros(257, dtype=np.int64)
    # Codes are built in 64-bit arithmetic. Depth 62 needs Fibonacci-growth
    # frequencies over ~16 TB of input, so the cap never binds on real
    # streams, but a corrupted table must be rejected before the shifts
    # overflow. The Kraft sum check likewise keeps corrupt tables from
    # producing out-of-range codes.
    max_length = max(l for l, _ in pairs)
    if max_length > 62:
        raise CorruptDataError(
            f"huffman code length {max_length} exceeds the supported 62"
        )
    kraft = sum(int(length_counts[l]) << (max_length - l) for l in range(1, max_length + 1))
    if kraft > 1 << max_length:
        raise CorruptDataError("huffman code lengths oversubscribe the code space")
    code = 0
    index = 0
    for length in range(1, max_length + 1):
        code <<= 1
        first_code[length] = code
        first_index[length] = index
        code += int(length_counts[length])
        index += int(length_counts[length])
    out = np.zeros(count, dtype=np.uint8)
    failed_at = _unpack_bits(
        np.frombuffer(payload, dtype=np.uint8),
        count,
        first_code,
        first_index,
        length_counts,
        ordered_symbols,
        out,
    )
    if int(failed_at) >= 0:
        raise CorruptDataError(f"huffman payload exhausted at symbol {int(failed_at)}")
    return out.tobytes()
