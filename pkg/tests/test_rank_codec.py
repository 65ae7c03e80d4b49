"""Rank transform and its two serializations."""

from __future__ import annotations

import random

import pytest

import oracles
from rankzip.errors import CorruptDataError, FingerprintMismatchError
from rankzip.predictor import Ranking, builtin_descriptor
from rankzip.rank_codec import (
    RankStream,
    decode_ranks,
    deserialize_ranks,
    encode_ranks,
    serialize_ranks,
    with_fingerprints,
)
from rankzip.tokenizer import byte_vocabulary, tokenize
from conftest import log_uniform_lengths, random_unicode_string


class PerfectOracleSession:
    """Ranks the scripted next token first; everything else in id order."""

    def __init__(self, script: tuple[int, ...], vocab_size: int) -> None:
        self.script = script
        self.vocab_size = vocab_size
        self.position = 0
        self.fingerprint = b"\xee" * 32

    def rank_next(self) -> Ranking:
        head = self.script[self.position]
        rest = tuple(t for t in range(self.vocab_size) if t != head)
        return Ranking(ordered=(head,) + rest)

    def advance(self, observed: int) -> None:
        self.position += 1

    def close(self) -> None:
        pass


def test_perfect_predictor_yields_all_zero_ranks():
    vocab = byte_vocabulary()
    text = b"any old text"
    script = tokenize(text, vocab).tokens
    session = PerfectOracleSession(script, len(vocab))
    stream = encode_ranks(text, builtin_descriptor(), vocab, session=session)
    assert stream.ranks == (0,) * len(script)


def test_all_zero_stream_reproduces_the_oracle_greedy_continuation():
    vocab = byte_vocabulary()
    text = b"any old text"
    script = tokenize(text, vocab).tokens
    stream = RankStream(
        ranks=(0,) * len(script),
        token_count=len(script),
        predictor_fingerprint=b"\xee" * 32,
        vocab_fingerprint=vocab.fingerprint,
    )
    session = PerfectOracleSession(script, len(vocab))
    assert decode_ranks(stream, builtin_descriptor(), vocab, session=session) == text


def test_empty_text_gives_empty_stream(vocab):
    stream = encode_ranks(b"", builtin_descriptor(), vocab)
    assert stream.ranks == ()
    assert stream.token_count == 0
    assert decode_ranks(stream, builtin_descriptor(), vocab) == b""


def test_alternating_bytes_reach_rank_zero_after_one_bigram_each():
    vocab = byte_vocabulary()
    stream = encode_ranks(b"abababab", builtin_descriptor(order=1), vocab)
    assert stream.ranks == (ord("a"), ord("b"), 0, 0, 0, 0, 0, 0)


def test_round_trip_random_strings_fused_and_reference(vocab):
    rng = random.Random(41)
    descriptor = builtin_descriptor()
    for length in log_uniform_lengths(rng, 40, 400):
        text = random_unicode_string(rng, length).encode("utf-8")
        stream = encode_ranks(text, descriptor, vocab)
        assert decode_ranks(stream, descriptor, vocab) == text
        # force the pure-Python reference by handing in live sessions
        from rankzip.predictor import BuiltinPredictor

        ref_stream = encode_ranks(
            text, descriptor, vocab, session=BuiltinPredictor(descriptor, len(vocab))
        )
        assert ref_stream.ranks == stream.ranks
        back = decode_ranks(
            stream, descriptor, vocab, session=BuiltinPredictor(descriptor, len(vocab))
        )
        assert back == text


def test_round_trip_corpus_files(vocab, corpus_texts):
    descriptor = builtin_descriptor()
    for text in corpus_texts[:3]:
        data = text.encode("utf-8")
        stream = encode_ranks(data, descriptor, vocab)
        assert decode_ranks(stream, descriptor, vocab) == data


def test_decode_refuses_wrong_vocabulary(vocab, tiny_vocab):
    descriptor = builtin_descriptor()
    stream = encode_ranks(b"hello", descriptor, vocab)
    with pytest.raises(FingerprintMismatchError):
        decode_ranks(stream, descriptor, tiny_vocab)


def test_decode_refuses_wrong_predictor(vocab):
    stream = encode_ranks(b"hello", builtin_descriptor(order=3), vocab)
    with pytest.raises(FingerprintMismatchError):
        decode_ranks(stream, builtin_descriptor(order=2), vocab)


def test_decode_rejects_out_of_vocabulary_rank(vocab):
    stream = encode_ranks(b"hello", builtin_descriptor(), vocab)
    bad = RankStream(
        ranks=stream.ranks[:-1] + (len(vocab),),
        token_count=stream.token_count,
        predictor_fingerprint=stream.predictor_fingerprint,
        vocab_fingerprint=stream.vocab_fingerprint,
    )
    with pytest.raises(CorruptDataError):
        decode_ranks(bad, builtin_descriptor(), vocab)


def make_stream(ranks: tuple[int, ...]) -> RankStream:
    return RankStream(
        ranks=ranks,
        token_count=len(ranks),
        predictor_fingerprint=b"",
        vocab_fingerprint=b"",
    )


def test_varint_worked_examples():
    assert serialize_ranks(make_stream((0, 2, 0)), "varint") == b"\x00\x02\x00"
    assert serialize_ranks(make_stream((300,)), "varint") == b"\xac\x02"
    assert serialize_ranks(make_stream(()), "varint") == b""


def test_varint_matches_reference_encoder():
    rng = random.Random(42)
    for _ in range(200):
        ranks = tuple(
            rng.randrange(1 << rng.randrange(1, 21)) for _ in range(rng.randrange(0, 30))
        )
        assert serialize_ranks(make_stream(ranks), "varint") == oracles.varint_reference(
            list(ranks)
        )


def test_ascii_dot_worked_examples():
    assert serialize_ranks(make_stream((0, 2, 0)), "ascii-dot") == b"0.2.0"
    assert deserialize_ranks(b"0.2.0", "ascii-dot").ranks == (0, 2, 0)
    assert deserialize_ranks(b"", "ascii-dot").ranks == ()
    assert serialize_ranks(make_stream(()), "ascii-dot") == b""


def test_ascii_dot_empty_field_reports_offset():
    with pytest.raises(CorruptDataError, match="offset 2"):
        deserialize_ranks(b"1..2", "ascii-dot")


def test_ascii_dot_rejects_junk():
    for bad in (b"1.x.2", b".", b"1.", b"+3", b"12a"):
        with pytest.raises(CorruptDataError):
            deserialize_ranks(bad, "ascii-dot")


def test_varint_rejects_dangling_continuation():
    with pytest.raises(CorruptDataError):
        deserialize_ranks(b"\x80", "varint")
    with pytest.raises(CorruptDataError):
        deserialize_ranks(b"\x05\xff", "varint")


def test_serialization_round_trip_both_modes():
    rng = random.Random(43)
    for mode in ("varint", "ascii-dot"):
        for _ in range(100):
            ranks = tuple(rng.randrange(0, 5000) for _ in range(rng.randrange(0, 40)))
            blob = serialize_ranks(make_stream(ranks), mode)
            assert deserialize_ranks(blob, mode).ranks == ranks


def test_unknown_serialization_mode_rejected():
    with pytest.raises(CorruptDataError):
        serialize_ranks(make_stream((1,)), "base64")
    with pytest.raises(CorruptDataError):
        deserialize_ranks(b"", "base64")


def test_with_fingerprints_attaches_without_touching_ranks():
    stream = deserialize_ranks(b"\x00\x07", "varint")
    stamped = with_fingerprints(stream, b"\x01" * 32, b"\x02" * 32)
    assert stamped.ranks == (0, 7)
    assert stamped.predictor_fingerprint == b"\x01" * 32
    assert stamped.vocab_fingerprint == b"\x02" * 32
