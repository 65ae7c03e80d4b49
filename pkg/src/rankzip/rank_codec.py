"""Text to rank-stream transform and its serializations.

Encoding walks the token stream, asks the predictor for a full ranking before
each token, and emits the true token's position; decoding asks the identical
predictor state for the same ranking and picks the token at the recorded
position. Both directions advance the predictor with the true token, so the
ranking sequences coincide and the transform is lossless.

Serialized form is either unsigned LEB128 varints (default) or the ranks as
decimal ASCII joined by '.' with no trailing separator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _fast
from .errors import CorruptDataError, FingerprintMismatchError
from .predictor import (
    BuiltinPredictor,
    PredictorDescriptor,
    open_session,
    token_at_rank,
    token_rank,
)
from .tokenizer import TokenSequence, Vocabulary, detokenize, tokenize


@dataclass(frozen=True)
class RankStream:
    ranks: tuple[int, ...]
    token_count: int
    predictor_fingerprint: bytes
    vocab_fingerprint: bytes

    def __post_init__(self) -> None:
        if len(self.ranks) != self.token_count:
            raise CorruptDataError("rank count disagrees with token count")


def _use_fused(session: object, descriptor: PredictorDescriptor) -> bool:
    # The compiled loop never truncates context, so it only matches the
    # reference model while the window is deep enough to hold every suffix
    # the scoring order can ask for.
    return (
        _fast.HAVE_NUMBA
        and isinstance(session, BuiltinPredictor)
        and descriptor.mode == "individual"
        and descriptor.window >= descriptor.order
        and session.step == 0
    )


def encode_ranks(
    text: bytes,
    descriptor: PredictorDescriptor,
    vocab: Vocabulary,
    session: object | None = None,
) -> RankStream:
    tokens = tokenize(text, vocab)
    if session is None:
        session = open_session(descriptor, len(vocab), vocab.fingerprint)
    if _use_fused(session, descriptor):
        ranks = _fast.encode_stream(
            np.asarray(tokens.tokens, dtype=np.int64), len(vocab), descriptor.order
        )
        rank_tuple = tuple(int(r) for r in ranks)
    else:
        collected = []
        for token in tokens.tokens:
            ranking = session.rank_next()
            collected.append(token_rank(ranking, token))
            session.advance(token)
        rank_tuple = tuple(collected)
    return RankStream(
        ranks=rank_tuple,
        token_count=len(tokens),
        predictor_fingerprint=session.fingerprint,
        vocab_fingerprint=vocab.fingerprint,
    )


def decode_ranks(
    stream: RankStream,
    descriptor: PredictorDescriptor,
    vocab: Vocabulary,
    session: object | None = None,
) -> bytes:
    if stream.vocab_fingerprint != vocab.fingerprint:
        raise FingerprintMismatchError(
            "vocabulary fingerprint does not match the recorded one"
        )
    if session is None:
        session = open_session(descriptor, len(vocab), vocab.fingerprint)
    if session.fingerprint != stream.predictor_fingerprint:
        raise FingerprintMismatchError(
            "predictor fingerprint does not match the recorded one"
        )
    if _use_fused(session, descriptor):
        tokens, error_index = _fast.decode_stream(
            np.asarray(stream.ranks, dtype=np.int64), len(vocab), descriptor.order
        )
        if error_index >= 0:
            raise CorruptDataError(
                f"rank {stream.ranks[error_index]} at position {error_index} "
                f"outside vocabulary of {len(vocab)}"
            )
        ids: tuple[int, ...] = tuple(int(t) for t in tokens)
    else:
        collected = []
        for rank in stream.ranks:
            ranking = session.rank_next()
            token = token_at_rank(ranking, rank)
            collected.append(token)
            session.advance(token)
        ids = tuple(collected)
    return detokenize(TokenSequence(tokens=ids, source_length=0), vocab)


def serialize_ranks(stream: RankStream, mode: str) -> bytes:
    if mode == "varint":
        out = bytearray()
        for rank in stream.ranks:
            value = rank
            while True:
                low = value & 0x7F
                value >>= 7
                if value:
                    out.append(low | 0x80)
                else:
                    out.append(low)
                    break
        return bytes(out)
    if mode == "ascii-dot":
        return b".".join(str(r).encode("ascii") for r in stream.ranks)
    raise CorruptDataError(f"unknown rank serialization {mode!r}")


def deserialize_ranks(data: bytes, mode: str) -> RankStream:
    """Parses ranks only; fingerprints are attached by the container layer."""
    if mode == "varint":
        ranks = _parse_varints(data)
    elif mode == "ascii-dot":
        ranks = _parse_ascii_dot(data)
    else:
        raise CorruptDataError(f"unknown rank serialization {mode!r}")
    return RankStream(
        ranks=tuple(ranks),
        token_count=len(ranks),
        predictor_fingerprint=b"",
        vocab_fingerprint=b"",
    )


def with_fingerprints(stream: RankStream, predictor_fp: bytes, vocab_fp: bytes) -> RankStream:
    return replace(stream, predictor_fingerprint=predictor_fp, vocab_fingerprint=vocab_fp)


def _parse_varints(data: bytes) -> list[int]:
    ranks: list[int] = []
    value = 0
    shift = 0
    start = 0
    for offset, byte in enumerate(data):
        if shift > 56:
            raise CorruptDataError(f"varint too long at offset {start}")
        value |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
        else:
            ranks.append(value)
            value = 0
            shift = 0
            start = offset + 1
    if shift != 0:
        raise CorruptDataError(f"truncated varint at offset {start}")
    return ranks


def _parse_ascii_dot(data: bytes) -> list[int]:
    if data == b"":
        return []
    ranks: list[int] = []
    offset = 0
    for chunk in data.split(b"."):
        if chunk == b"" or not chunk.isdigit():
            raise CorruptDataError(f"malformed rank field at offset {offset}")
        ranks.append(int(chunk))
        offset += len(chunk) + 1
    return ranks
