"""Trainable byte-pair tokenizer with a zero-config byte-level fallback.

Token IDs are indices into an ordered entry list whose first 256 entries are
always the single bytes, so any input round-trips even under an empty merge
list. Training merges the most frequent adjacent pair (counted with overlaps),
ties broken by the lexicographically smallest (left, right) byte-strings, and
stops early once no pair occurs twice. Tokenization replays the merges in
creation order, each as one greedy left-to-right pass.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptDataError, UsageError

VOCAB_MAGIC = b"AZVB"
VOCAB_VERSION = 1

# Pair keys pack two token ids into one int64; ids must stay below 2^21.
_PAIR_SHIFT = 21
_MAX_TOKEN_ID = (1 << _PAIR_SHIFT) - 1


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[bytes, ...]
    merges: tuple[tuple[int, int], ...]

    @property
    def fingerprint(self) -> bytes:
        return hashlib.sha256(_serialize_body(self)).digest()

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[int, ...]
    source_length: int

    def __len__(self) -> int:
        return len(self.tokens)


def byte_vocabulary() -> Vocabulary:
    """The fallback vocabulary: one token per byte, no merges."""
    return Vocabulary(entries=tuple(bytes([i]) for i in range(256)), merges=())


def _merge_pass(seq: np.ndarray, left: int, right: int, new_id: int) -> np.ndarray:
    """One greedy left-to-right replacement of (left, right) by new_id."""
    if len(seq) < 2:
        return seq
    pairs = (seq[:-1].astype(np.int64) << _PAIR_SHIFT) | seq[1:]
    hits = np.flatnonzero(pairs == (left << _PAIR_SHIFT) | right)
    if len(hits) == 0:
        return seq
    # Drop hits that overlap an already-taken position to its left.
    kept = []
    last = -2
    for h in hits:
        if h > last + 1:
            kept.append(h)
            last = h
    taken = np.asarray(kept, dtype=np.int64)
    out = seq.copy()
    out[taken] = new_id
    return np.delete(out, taken + 1)


def train_bpe(corpus: bytes, target_vocab_size: int) -> Vocabulary:
    if len(corpus) == 0:
        raise UsageError("empty training corpus")
    if target_vocab_size < 257:
        raise UsageError(
            f"target vocabulary size must be at least 257, got {target_vocab_size}"
        )
    entries: list[bytes] = [bytes([i]) for i in range(256)]
    merges: list[tuple[int, int]] = []
    seq = np.frombuffer(corpus, dtype=np.uint8).astype(np.int32)
    while len(entries) < target_vocab_size and len(seq) >= 2:
        pairs = (seq[:-1].astype(np.int64) << _PAIR_SHIFT) | seq[1:]
        uniq, counts = np.unique(pairs, return_counts=True)
        top = counts.max()
        if top < 2:
            break
        tied = uniq[counts == top]
        left, right = min(
            ((int(p) >> _PAIR_SHIFT, int(p) & _MAX_TOKEN_ID) for p in tied),
            key=lambda lr: (entries[lr[0]], entries[lr[1]]),
        )
        new_id = len(entries)
        if new_id > _MAX_TOKEN_ID:
            raise UsageError(f"vocabulary size limit is {_MAX_TOKEN_ID + 1}")
        entries.append(entries[left] + entries[right])
        merges.append((left, right))
        seq = _merge_pass(seq, left, right, new_id)
    return Vocabulary(entries=tuple(entries), merges=tuple(merges))


def tokenize(text: bytes, vocab: Vocabulary) -> TokenSequence:
    seq = np.frombuffer(text, dtype=np.uint8).astype(np.int32)
    # A merge can only fire while both constituents occur in the sequence.
    # Presence is tracked conservatively (never cleared), so skipping is exact.
    present = np.zeros(len(vocab.entries), dtype=bool)
    present[seq] = True
    for index, (left, right) in enumerate(vocab.merges):
        if len(seq) < 2:
            break
        if not (present[left] and present[right]):
            continue
        merged = _merge_pass(seq, left, right, 256 + index)
        if merged is not seq:
            present[256 + index] = True
            seq = merged
    return TokenSequence(tokens=tuple(int(t) for t in seq), source_length=len(text))


def detokenize(tokens: TokenSequence | tuple[int, ...] | list[int], vocab: Vocabulary) -> bytes:
    ids = tokens.tokens if isinstance(tokens, TokenSequence) else tokens
    parts = []
    for t in ids:
        if not 0 <= t < len(vocab.entries):
            raise CorruptDataError(f"token id {t} outside vocabulary of {len(vocab.entries)}")
        parts.append(vocab.entries[t])
    return b"".join(parts)


def _serialize_body(vocab: Vocabulary) -> bytes:
    out = bytearray()
    out += struct.pack("<I", len(vocab.entries))
    for entry in vocab.entries:
        out += struct.pack("<H", len(entry))
        out += entry
    out += struct.pack("<I", len(vocab.merges))
    for left, right in vocab.merges:
        out += struct.pack("<II", left, right)
    return bytes(out)


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(VOCAB_MAGIC)
        fh.write(struct.pack("<B", VOCAB_VERSION))
        fh.write(_serialize_body(vocab))


def _read_exact(data: bytes, offset: int, size: int) -> tuple[bytes, int]:
    if offset + size > len(data):
        raise CorruptDataError(f"vocabulary file truncated at offset {offset}")
    return data[offset : offset + size], offset + size


def load_vocabulary(path: str) -> Vocabulary:
    with open(path, "rb") as fh:
        return parse_vocabulary(fh.read())


def parse_vocabulary(data: bytes) -> Vocabulary:
    chunk, offset = _read_exact(data, 0, 4)
    if chunk != VOCAB_MAGIC:
        raise CorruptDataError("not a vocabulary file (bad magic)")
    chunk, offset = _read_exact(data, offset, 1)
    if chunk[0] != VOCAB_VERSION:
        raise CorruptDataError(f"unsupported vocabulary version {chunk[0]}")
    chunk, offset = _read_exact(data, offset, 4)
    (entry_count,) = struct.unpack("<I", chunk)
    entries: list[bytes] = []
    for _ in range(entry_count):
        chunk, offset = _read_exact(data, offset, 2)
        (length,) = struct.unpack("<H", chunk)
        entry, offset = _read_exact(data, offset, length)
        entries.append(entry)
    chunk, offset = _read_exact(data, offset, 4)
    (merge_count,) = struct.unpack("<I", chunk)
    merges: list[tuple[int, int]] = []
    for _ in range(merge_count):
        chunk, offset = _read_exact(data, offset, 8)
        merges.append(struct.unpack("<II", chunk))
    if offset != len(data):
        raise CorruptDataError(f"{len(data) - offset} trailing bytes after vocabulary")
    vocab = Vocabulary(entries=tuple(entries), merges=tuple(merges))
    _validate(vocab)
    return vocab


def _validate(vocab: Vocabulary) -> None:
    if len(vocab.entries) < 256:
        raise CorruptDataError("vocabulary misses base byte alphabet")
    for i in range(256):
        if vocab.entries[i] != bytes([i]):
            raise CorruptDataError(f"entry {i} is not the base byte {i}")
    if len(vocab.entries) != 256 + len(vocab.merges):
        raise CorruptDataError("entry count does not match merge count")
    for index, (left, right) in enumerate(vocab.merges):
        result_id = 256 + index
        if left >= result_id or right >= result_id:
            raise CorruptDataError(f"merge {index} references a later entry")
        if vocab.entries[result_id] != vocab.entries[left] + vocab.entries[right]:
            raise CorruptDataError(f"entry {result_id} does not equal its merge result")
