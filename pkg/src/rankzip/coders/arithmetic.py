"""Adaptive binary-renormalized arithmetic coder.

Order-0 model over 257 symbols: the 256 byte values plus a terminator that is
encoded once at the end of the stream, so no length field is needed. Laplace
initialization gives every symbol frequency 1, each occurrence adds 2, and
the table halves (rounding up, so counts stay positive) whenever the total
would pass 2**16. The gentle increment keeps near-uniform data close to its
8-bit entropy while skewed streams still concentrate; the bounded total keeps
every intermediate product under 2**56 and exact in signed 64-bit arithmetic
with 40-bit coder state.

Encoder and decoder share the classic interval construction: split [low,
high] by cumulative frequency, shift out matched top bits, and count pending
bits while the interval straddles the midpoint. The encoder finishes with one
disambiguating bit; the decoder treats input exhaustion as zero bits and
stops at the terminator symbol. Total overhead beyond the model's ideal code
length (terminator included) is the 5-byte stream magic plus one byte of
termination and padding, which the calibration tests bound.

Empty input is the stated special case: the output is the magic alone.
"""

from __future__ import annotations

import numpy as np

from .._fast import kernel
from ..errors import CorruptDataError

STREAM_MAGIC = b"AZAC"
STREAM_VERSION = 1

STATE_BITS = 40
_FULL = 1 << STATE_BITS
_HALF = _FULL >> 1
_QUARTER = _FULL >> 2
_MASK = _FULL - 1

ALPHABET = 257  # 256 byte values + terminator
_EOS = 256
TOTAL_CAP = 1 << 16
INCREMENT = 2

# The decoder reads at most the payload bits plus the preloaded state and a
# little termination slack; asking for bits far past that means corruption,
# so decoding always halts even on garbage.
_SLACK_BITS = STATE_BITS + 64


@kernel
def _arith_encode(data, out):
    freq = np.ones(ALPHABET, np.int64)
    total = np.int64(ALPHABET)
    low = np.int64(0)
    high = np.int64(_MASK)
    pending = np.int64(0)
    bit_buffer = np.int64(0)
    bit_count = np.int64(0)
    position = np.int64(0)
    n = data.shape[0]
    for i in range(n + 1):
        value = np.int64(data[i]) if i < n else np.int64(_EOS)
        cum_lo = np.int64(0)
        for s in range(value):
            cum_lo += freq[s]
        cum_hi = cum_lo + freq[value]
        span = high - low + 1
        high = low + (span * cum_hi) // total - 1
        low = low + (span * cum_lo) // total
        while True:
            if ((low ^ high) & _HALF) == 0:
                bit = low >> (STATE_BITS - 1)
                bit_buffer = (bit_buffer << 1) | bit
                bit_count += 1
                if bit_count == 8:
                    out[position] = bit_buffer
                    position += 1
                    bit_buffer = np.int64(0)
                    bit_count = np.int64(0)
                other = bit ^ 1
                while pending > 0:
                    bit_buffer = (bit_buffer << 1) | other
                    bit_count += 1
                    if bit_count == 8:
                        out[position] = bit_buffer
                        position += 1
                        bit_buffer = np.int64(0)
                        bit_count = np.int64(0)
                    pending -= 1
                low = (low << 1) & _MASK
                high = ((high << 1) & _MASK) | 1
            elif (low & ~high & _QUARTER) != 0:
                pending += 1
                low = (low << 1) ^ _HALF
                high = ((high ^ _HALF) << 1) | _HALF | 1
            else:
                break
        freq[value] += INCREMENT
        total += INCREMENT
        if total + INCREMENT > TOTAL_CAP:
            total = np.int64(0)
            for s in range(ALPHABET):
                freq[s] = (freq[s] + 1) >> 1
                total += freq[s]
    # One bit pins the final interval; anything after it may read as zero.
    bit_buffer = (bit_buffer << 1) | 1
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
def _arith_decode(payload):
    freq = np.ones(ALPHABET, np.int64)
    total = np.int64(ALPHABET)
    low = np.int64(0)
    high = np.int64(_MASK)
    code = np.int64(0)
    total_bits = np.int64(payload.shape[0]) * 8
    bit_position = np.int64(0)
    for _ in range(STATE_BITS):
        bit = np.int64(0)
        if bit_position < total_bits:
            bit = np.int64(
                (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
            )
        bit_position += 1
        code = (code << 1) | bit
    capacity = np.int64(4096)
    out = np.zeros(capacity, np.uint8)
    produced = np.int64(0)
    while True:
        if bit_position > total_bits + _SLACK_BITS:
            return out, np.int64(-1)
        span = high - low + 1
        target = ((code - low + 1) * total - 1) // span
        cum_lo = np.int64(0)
        value = np.int64(ALPHABET - 1)
        for s in range(ALPHABET):
            nxt = cum_lo + freq[s]
            if target < nxt:
                value = np.int64(s)
                break
            cum_lo = nxt
        cum_hi = cum_lo + freq[value]
        high = low + (span * cum_hi) // total - 1
        low = low + (span * cum_lo) // total
        while True:
            if ((low ^ high) & _HALF) == 0:
                pass
            elif (low & ~high & _QUARTER) != 0:
                code = code ^ _QUARTER
                low = low ^ _QUARTER
                high = high ^ _QUARTER
            else:
                break
            bit = np.int64(0)
            if bit_position < total_bits:
                bit = np.int64(
                    (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
                )
            bit_position += 1
            low = (low << 1) & _MASK
            high = ((high << 1) & _MASK) | 1
            code = ((code << 1) & _MASK) | bit
        if value == _EOS:
            return out, produced
        if produced == capacity:
            capacity = capacity * 2
            grown = np.zeros(capacity, np.uint8)
            grown[:produced] = out[:produced]
            out = grown
        out[produced] = value
        produced += 1
        freq[value] += INCREMENT
        total += INCREMENT
        if total + INCREMENT > TOTAL_CAP:
            total = np.int64(0)
            for s in range(ALPHABET):
                freq[s] = (freq[s] + 1) >> 1
                total += freq[s]


def model_cost_bits(data: bytes) -> float:
    """Ideal code length of the adaptive model over the full coded sequence,
    terminator included; calibration tests bound the gap to the output."""
    freq = [1] * ALPHABET
    total = ALPHABET
    bits = 0.0
    for value in data:
        bits += float(np.log2(total / freq[value]))
        freq[value] += INCREMENT
        total += INCREMENT
        if total + INCREMENT > TOTAL_CAP:
            freq = [(f + 1) >> 1 for f in freq]
            total = sum(freq)
    return bits + float(np.log2(total / freq[_EOS]))


def compress(data: bytes) -> bytes:
    header = STREAM_MAGIC + bytes([STREAM_VERSION])
    if not data:
        return header
    out = np.zeros(len(data) * 2 + 64, dtype=np.uint8)
    used = _arith_encode(np.frombuffer(data, dtype=np.uint8), out)
    return header + out[: int(used)].tobytes()


def decompress(data: bytes) -> bytes:
    if len(data) < 5:
        raise CorruptDataError("arithmetic stream shorter than its magic")
    if data[:4] != STREAM_MAGIC:
        raise CorruptDataError("not an arithmetic stream (bad magic)")
    if data[4] != STREAM_VERSION:
        raise CorruptDataError(f"unsupported arithmetic stream version {data[4]}")
    if len(data) == 5:
        return b""
    payload = np.frombuffer(data[5:], dtype=np.uint8)
    out, produced = _arith_decode(payload)
    if int(produced) < 0:
        raise CorruptDataError("arithmetic payload never terminates")
    return out[: int(produced)].tobytes()
