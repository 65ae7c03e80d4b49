"""On-disk container for compressed text (extension .azip).

Layout, all little-endian:

    magic "AZIP", version u8, mode u8 (0 raw, 1 rank), serialization u8
    (0 varint, 1 ascii-dot; 0 in raw mode), coder id u8, parameter count u8,
    parameters u32 each, then in rank mode a u16-length-prefixed predictor id
    string, the 32-byte predictor fingerprint, the 32-byte vocabulary
    fingerprint, and a u64 token count; then always a u64 original byte
    length, a u32 CRC-32 of the original text, a u32 CRC-32 of every header
    byte before this field, a u32 CRC-32 of the payload, and the payload.

Integrity coverage is total: the header CRC spans everything up to and
including the text CRC, and the payload CRC spans the rest, so any single
corrupted byte fails one of the checks and nothing decodes silently wrong.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from .coders import CODER_NAMES
from .errors import CorruptDataError, UsageError

CONTAINER_MAGIC = b"AZIP"
CONTAINER_VERSION = 1
CONTAINER_EXTENSION = ".azip"

MODE_RAW = "raw"
MODE_RANK = "rank"

SERIALIZATION_VARINT = "varint"
SERIALIZATION_ASCII_DOT = "ascii-dot"

_MODE_CODES = {MODE_RAW: 0, MODE_RANK: 1}
_SERIALIZATION_CODES = {SERIALIZATION_VARINT: 0, SERIALIZATION_ASCII_DOT: 1}
_FINGERPRINT_SIZE = 32


@dataclass(frozen=True)
class ContainerHeader:
    """Everything a reader needs to reverse the compression pipeline."""

    mode: str
    coder_name: str
    coder_params: tuple[int, ...]
    original_length: int
    original_crc32: int
    serialization: str | None = None
    predictor_id: str | None = None
    predictor_fingerprint: bytes | None = None
    vocab_fingerprint: bytes | None = None
    token_count: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in _MODE_CODES:
            raise UsageError(f"invalid container mode {self.mode!r}")
        if self.mode == MODE_RANK:
            if self.serialization not in _SERIALIZATION_CODES:
                raise UsageError(
                    f"invalid serialization {self.serialization!r}"
                )
            if self.predictor_id is None or self.token_count is None:
                raise UsageError("rank mode requires predictor id and token count")
            for label, fp in (
                ("predictor", self.predictor_fingerprint),
                ("vocabulary", self.vocab_fingerprint),
            ):
                if fp is None or len(fp) != _FINGERPRINT_SIZE:
                    raise UsageError(f"rank mode requires a 32-byte {label} fingerprint")


def write_container(header: ContainerHeader, payload: bytes) -> bytes:
    if header.coder_name not in CODER_NAMES:
        raise UsageError(f"unknown coder {header.coder_name!r}")
    out = bytearray()
    out += CONTAINER_MAGIC
    out += struct.pack(
        "<BBBBB",
        CONTAINER_VERSION,
        _MODE_CODES[header.mode],
        _SERIALIZATION_CODES.get(header.serialization or "", 0),
        CODER_NAMES.index(header.coder_name),
        len(header.coder_params),
    )
    for value in header.coder_params:
        out += struct.pack("<I", value)
    if header.mode == MODE_RANK:
        encoded_id = header.predictor_id.encode("utf-8")
        out += struct.pack("<H", len(encoded_id))
        out += encoded_id
        out += header.predictor_fingerprint
        out += header.vocab_fingerprint
        out += struct.pack("<Q", header.token_count)
    out += struct.pack("<QI", header.original_length, header.original_crc32)
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    out += struct.pack("<I", zlib.crc32(payload))
    out += payload
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise CorruptDataError(f"container truncated reading {what}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))


def read_container(data: bytes) -> tuple[ContainerHeader, bytes]:
    """Parse and verify; returns (header, payload)."""
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != CONTAINER_MAGIC:
        raise CorruptDataError("not a container: bad magic")
    (version,) = reader.unpack("<B", "version")
    if version != CONTAINER_VERSION:
        raise CorruptDataError(f"unsupported container version {version}")
    mode_code, serialization_code, coder_id, param_count = reader.unpack(
        "<BBBB", "mode block"
    )
    if mode_code not in (0, 1):
        raise CorruptDataError(f"invalid container mode byte {mode_code}")
    if serialization_code not in (0, 1):
        raise CorruptDataError(
            f"invalid serialization byte {serialization_code}"
        )
    if coder_id >= len(CODER_NAMES):
        raise CorruptDataError(f"unknown coder id {coder_id}")
    params = tuple(
        reader.unpack("<I", "coder parameter")[0] for _ in range(param_count)
    )
    predictor_id = None
    predictor_fingerprint = None
    vocab_fingerprint = None
    token_count = None
    mode = MODE_RANK if mode_code == 1 else MODE_RAW
    if mode == MODE_RANK:
        (id_length,) = reader.unpack("<H", "predictor id length")
        raw_id = reader.take(id_length, "predictor id")
        try:
            predictor_id = raw_id.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptDataError("predictor id is not valid utf-8") from exc
        predictor_fingerprint = reader.take(_FINGERPRINT_SIZE, "predictor fingerprint")
        vocab_fingerprint = reader.take(_FINGERPRINT_SIZE, "vocabulary fingerprint")
        (token_count,) = reader.unpack("<Q", "token count")
    original_length, original_crc32 = reader.unpack("<QI", "length block")
    header_span = data[: reader.offset]
    (stored_header_crc,) = reader.unpack("<I", "header checksum")
    if zlib.crc32(header_span) != stored_header_crc:
        raise CorruptDataError("header checksum mismatch")
    (stored_payload_crc,) = reader.unpack("<I", "payload checksum")
    payload = data[reader.offset :]
    if zlib.crc32(payload) != stored_payload_crc:
        raise CorruptDataError("payload checksum mismatch")
    header = ContainerHeader(
        mode=mode,
        coder_name=CODER_NAMES[coder_id],
        coder_params=params,
        original_length=original_length,
        original_crc32=original_crc32,
        serialization=(
            SERIALIZATION_ASCII_DOT if serialization_code == 1 else SERIALIZATION_VARINT
        )
        if mode == MODE_RANK
        else None,
        predictor_id=predictor_id,
        predictor_fingerprint=predictor_fingerprint,
        vocab_fingerprint=vocab_fingerprint,
        token_count=token_count,
    )
    return header, payload
