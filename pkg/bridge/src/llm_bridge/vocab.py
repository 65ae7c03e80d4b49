"""Reader for the shared subword vocabulary artifact.

The artifact is a standalone binary file: a four-byte magic ``AZVB``, a
format version byte, then a body holding every token's byte string followed
by the ordered list of pair merges that built the non-byte tokens. The
fingerprint exchanged during the wire handshake is the SHA-256 of the body
alone, so independent readers of the same file agree on it without sharing
any code.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

MAGIC = b"AZVB"
FORMAT_VERSION = 1
BYTE_TOKENS = 256
BUNDLED_VOCAB_RESOURCE = "english.azvb"


class VocabularyFormatError(ValueError):
    """The vocabulary artifact violates its binary format."""


@dataclass(frozen=True)
class BridgeVocabulary:
    """Token byte strings plus the merge history that created them."""

    entries: tuple[bytes, ...]
    merges: tuple[tuple[int, int], ...]
    fingerprint: bytes

    def __len__(self) -> int:
        return len(self.entries)


def parse_vocabulary(data: bytes) -> BridgeVocabulary:
    if len(data) < 5 or data[:4] != MAGIC:
        raise VocabularyFormatError("not a vocabulary artifact (bad magic)")
    if data[4] != FORMAT_VERSION:
        raise VocabularyFormatError(f"unsupported vocabulary format version {data[4]}")
    body = data[5:]
    view = memoryview(body)
    offset = 0

    def take(size: int) -> memoryview:
        nonlocal offset
        if offset + size > len(view):
            raise VocabularyFormatError("vocabulary artifact truncated")
        chunk = view[offset : offset + size]
        offset += size
        return chunk

    (entry_count,) = struct.unpack("<I", take(4))
    entries = []
    for _ in range(entry_count):
        (length,) = struct.unpack("<H", take(2))
        entries.append(bytes(take(length)))
    (merge_count,) = struct.unpack("<I", take(4))
    merges = []
    for _ in range(merge_count):
        merges.append(struct.unpack("<II", take(8)))
    if offset != len(view):
        raise VocabularyFormatError("trailing bytes after vocabulary payload")
    if entry_count < BYTE_TOKENS:
        raise VocabularyFormatError("vocabulary must cover every single byte")
    for i in range(BYTE_TOKENS):
        if entries[i] != bytes([i]):
            raise VocabularyFormatError(f"entry {i} is not the single byte 0x{i:02x}")
    if entry_count != BYTE_TOKENS + merge_count:
        raise VocabularyFormatError(
            f"{entry_count} entries cannot come from {merge_count} merges"
        )
    for order, (left, right) in enumerate(merges):
        made = BYTE_TOKENS + order
        if left >= made or right >= made:
            raise VocabularyFormatError(f"merge {order} references a later token")
        if entries[made] != entries[left] + entries[right]:
            raise VocabularyFormatError(
                f"entry {made} is not the concatenation of its merge pair"
            )
    return BridgeVocabulary(
        entries=tuple(entries),
        merges=tuple(merges),
        fingerprint=hashlib.sha256(body).digest(),
    )


def load_vocabulary(path) -> BridgeVocabulary:
    with open(path, "rb") as handle:
        return parse_vocabulary(handle.read())


@lru_cache(maxsize=1)
def bundled_vocabulary() -> BridgeVocabulary:
    payload = (
        resources.files("llm_bridge")
        .joinpath("fixtures", BUNDLED_VOCAB_RESOURCE)
        .read_bytes()
    )
    return parse_vocabulary(payload)


def tokenize(text: bytes, vocab: BridgeVocabulary) -> list[int]:
    """Byte string to token ids by replaying the merge list in creation order.

    Each merge rewrites, in a single left-to-right pass, every non-overlapping
    occurrence of its pair; later merges see the output of earlier ones. The
    per-token occurrence counts let passes whose pair cannot occur be skipped
    without scanning.
    """
    if not text:
        return []
    seq = np.frombuffer(text, dtype=np.uint8).astype(np.int32)
    counts = np.bincount(seq, minlength=len(vocab.entries)).astype(np.int64)
    for order, (left, right) in enumerate(vocab.merges):
        if counts[left] == 0 or counts[right] == 0:
            continue
        hits = np.nonzero((seq[:-1] == left) & (seq[1:] == right))[0]
        if hits.size == 0:
            continue
        kept = []
        last = -2
        for hit in hits.tolist():
            if hit > last + 1:
                kept.append(hit)
                last = hit
        made = BYTE_TOKENS + order
        kept_arr = np.asarray(kept, dtype=np.int64)
        seq[kept_arr] = made
        mask = np.ones(len(seq), dtype=bool)
        mask[kept_arr + 1] = False
        seq = seq[mask]
        counts[left] -= len(kept)
        counts[right] -= len(kept)
        counts[made] += len(kept)
    return seq.tolist()


def detokenize(ids, vocab: BridgeVocabulary) -> bytes:
    entries = vocab.entries
    pieces = []
    for token in ids:
        if not 0 <= token < len(entries):
            raise VocabularyFormatError(
                f"token id {token} outside vocabulary of {len(entries)}"
            )
        pieces.append(entries[token])
    return b"".join(pieces)
