"""Greedy LZ77 with a sliding window and hash-chain match search.

Matching rule, which the tests pin against an exhaustive search: at each
position take the longest match of length 3..258 starting anywhere in the
previous 32768 bytes, preferring the smallest distance on ties, else emit a
literal. Matches may overlap their own output (distance < length copies
repeat). Hash chains bucket positions by their next three bytes and are walked
most-recent-first, so the first candidate of the winning length is also the
closest one; any length-3 match shares its bucket, which keeps the search
exact rather than heuristic.

Serialization is flag-bit oriented: 0 + 8 bits for a literal, 1 + 15 bits of
distance-1 + 8 bits of length-3 for a match, MSB-first, preceded by a 4-byte
magic with version byte, an 8-byte token count, and an 8-byte output length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .._fast import kernel
from ..errors import CorruptDataError

STREAM_MAGIC = b"AZLZ"
STREAM_VERSION = 1

_HEADER = struct.Struct("<QQ")

WINDOW_SIZE = 32768
MIN_MATCH = 3
MAX_MATCH = 258

_HASH_BITS = 15
_HASH_SIZE = 1 << _HASH_BITS


@dataclass(frozen=True)
class Lz77Token:
    """One literal byte (distance 0) or a back-reference into the window."""

    literal: int
    distance: int
    length: int

    def __post_init__(self) -> None:
        if self.distance == 0:
            if not 0 <= self.literal <= 255:
                raise ValueError(f"literal out of range: {self.literal}")
        else:
            if not 1 <= self.distance <= WINDOW_SIZE:
                raise ValueError(f"distance out of range: {self.distance}")
            if not MIN_MATCH <= self.length <= MAX_MATCH:
                raise ValueError(f"length out of range: {self.length}")

    @classmethod
    def literal_token(cls, value: int) -> "Lz77Token":
        return cls(literal=value, distance=0, length=0)

    @classmethod
    def match_token(cls, distance: int, length: int) -> "Lz77Token":
        return cls(literal=0, distance=distance, length=length)


@kernel
def _lz77_encode(data, out):
    n = data.shape[0]
    head = np.full(_HASH_SIZE, -1, np.int64)
    prev = np.full(max(n, 1), -1, np.int64)
    bit_buffer = np.int64(0)
    bit_count = np.int64(0)
    position = np.int64(0)
    token_count = np.int64(0)
    i = np.int64(0)
    while i < n:
        best_length = np.int64(0)
        best_distance = np.int64(0)
        if i + MIN_MATCH <= n:
            limit = n - i
            if limit > MAX_MATCH:
                limit = np.int64(MAX_MATCH)
            bucket = (
                (np.int64(data[i]) << 10)
                ^ (np.int64(data[i + 1]) << 5)
                ^ np.int64(data[i + 2])
            ) & (_HASH_SIZE - 1)
            candidate = head[bucket]
            floor = i - WINDOW_SIZE
            while candidate >= 0 and candidate >= floor:
                length = np.int64(0)
                while length < limit and data[candidate + length] == data[i + length]:
                    length += 1
                if length > best_length:
                    best_length = length
                    best_distance = i - candidate
                    if length == limit:
                        break
                candidate = prev[candidate]
        if best_length >= MIN_MATCH:
            bit_buffer = (bit_buffer << 1) | 1
            bit_count += 1
            if bit_count == 8:
                out[position] = bit_buffer
                position += 1
                bit_buffer = np.int64(0)
                bit_count = np.int64(0)
            field = ((best_distance - 1) << 8) | (best_length - MIN_MATCH)
            for b in range(22, -1, -1):
                bit_buffer = (bit_buffer << 1) | ((field >> b) & 1)
                bit_count += 1
                if bit_count == 8:
                    out[position] = bit_buffer
                    position += 1
                    bit_buffer = np.int64(0)
                    bit_count = np.int64(0)
            step = best_length
        else:
            bit_buffer = bit_buffer << 1
            bit_count += 1
            if bit_count == 8:
                out[position] = bit_buffer
                position += 1
                bit_buffer = np.int64(0)
                bit_count = np.int64(0)
            value = np.int64(data[i])
            for b in range(7, -1, -1):
                bit_buffer = (bit_buffer << 1) | ((value >> b) & 1)
                bit_count += 1
                if bit_count == 8:
                    out[position] = bit_buffer
                    position += 1
                    bit_buffer = np.int64(0)
                    bit_count = np.int64(0)
            step = np.int64(1)
        token_count += 1
        stop = i + step
        while i < stop:
            if i + MIN_MATCH <= n:
                bucket = (
                    (np.int64(data[i]) << 10)
                    ^ (np.int64(data[i + 1]) << 5)
                    ^ np.int64(data[i + 2])
                ) & (_HASH_SIZE - 1)
                prev[i] = head[bucket]
                head[bucket] = i
            i += 1
    if bit_count > 0:
        out[position] = bit_buffer << (8 - bit_count)
        position += 1
    return position, token_count


@kernel
def _lz77_decode(payload, token_count, out):
    n = out.shape[0]
    total_bits = np.int64(payload.shape[0]) * 8
    bit_position = np.int64(0)
    filled = np.int64(0)
    for t in range(token_count):
        if bit_position >= total_bits:
            return np.int64(t)
        flag = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
        bit_position += 1
        if flag == 0:
            if bit_position + 8 > total_bits:
                return np.int64(t)
            value = np.int64(0)
            for _ in range(8):
                bit = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
                bit_position += 1
                value = (value << 1) | bit
            if filled >= n:
                return np.int64(t)
            out[filled] = value
            filled += 1
        else:
            if bit_position + 23 > total_bits:
                return np.int64(t)
            field = np.int64(0)
            for _ in range(23):
                bit = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
                bit_position += 1
                field = (field << 1) | bit
            distance = (field >> 8) + 1
            length = (field & 0xFF) + MIN_MATCH
            if distance > filled or filled + length > n:
                return np.int64(t)
            for _ in range(length):
                out[filled] = out[filled - distance]
                filled += 1
    if filled != n:
        return np.int64(token_count)
    return np.int64(-1)


def compress(data: bytes) -> bytes:
    prefix = STREAM_MAGIC + bytes([STREAM_VERSION])
    if not data:
        return prefix + _HEADER.pack(0, 0)
    out = np.zeros(len(data) * 2 + 64, dtype=np.uint8)
    used, token_count = _lz77_encode(np.frombuffer(data, dtype=np.uint8), out)
    header = prefix + _HEADER.pack(int(token_count), len(data))
    return header + out[: int(used)].tobytes()


def decompress(data: bytes) -> bytes:
    if len(data) < 5 + _HEADER.size:
        raise CorruptDataError("lz77 stream shorter than its header")
    if data[:4] != STREAM_MAGIC:
        raise CorruptDataError("not an lz77 stream (bad magic)")
    if data[4] != STREAM_VERSION:
        raise CorruptDataError(f"unsupported lz77 stream version {data[4]}")
    token_count, original_length = _HEADER.unpack_from(data, 5)
    if token_count == 0 and original_length == 0:
        return b""
    payload_bits = (len(data) - 5 - _HEADER.size) * 8
    # Every token occupies at least 9 bits and emits 1..258 bytes; headers
    # outside those bounds are rejected before allocating the output.
    if token_count > payload_bits // 9:
        raise CorruptDataError("lz77 header claims more tokens than fit")
    if not token_count <= original_length <= token_count * MAX_MATCH:
        raise CorruptDataError("lz77 header claims an implausible output size")
    payload = np.frombuffer(data[5 + _HEADER.size :], dtype=np.uint8)
    out = np.zeros(original_length, dtype=np.uint8)
    failed_at = _lz77_decode(payload, token_count, out)
    if int(failed_at) >= 0:
        raise CorruptDataError(f"lz77 payload invalid at token {int(failed_at)}")
    return out.tobytes()


def parse_tokens(compressed: bytes) -> list[Lz77Token]:
    """Re-read a compressed stream as tokens; the match oracle checks these."""
    if len(compressed) < 5 + _HEADER.size or compressed[:4] != STREAM_MAGIC:
        raise CorruptDataError("lz77 stream shorter than its header")
    token_count, _ = _HEADER.unpack_from(compressed, 5)
    payload = compressed[5 + _HEADER.size :]
    total_bits = len(payload) * 8
    bit_position = 0

    def read_bits(width: int) -> int:
        nonlocal bit_position
        if bit_position + width > total_bits:
            raise CorruptDataError("lz77 payload exhausted mid-token")
        value = 0
        for _ in range(width):
            bit = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
            bit_position += 1
            value = (value << 1) | bit
        return value

    tokens: list[Lz77Token] = []
    for _ in range(token_count):
        if read_bits(1) == 0:
            tokens.append(Lz77Token.literal_token(read_bits(8)))
        else:
            field = read_bits(23)
            tokens.append(
                Lz77Token.match_token((field >> 8) + 1, (field & 0xFF) + MIN_MATCH)
            )
    return tokens
