"""Byte-pair tokenizer: training, round trips, and the on-disk format."""

from __future__ import annotations

import random

import pytest

import oracles
from rankzip.errors import CorruptDataError, UsageError
from rankzip.tokenizer import (
    Vocabulary,
    byte_vocabulary,
    detokenize,
    load_vocabulary,
    parse_vocabulary,
    save_vocabulary,
    tokenize,
    train_bpe,
)


def test_train_first_merge_is_the_doubled_byte():
    vocab = train_bpe(b"aaab", 258)
    assert vocab.merges[0] == (ord("a"), ord("a"))
    assert vocab.entries[256] == b"aa"


def test_train_all_distinct_bytes_creates_no_merges():
    vocab = train_bpe(bytes(range(256)), 257)
    assert vocab.merges == ()
    assert len(vocab) == 256


def test_train_alternating_pair_merges_pair_then_pair_of_pairs():
    vocab = train_bpe(b"abababab", 259)
    assert vocab.merges == ((ord("a"), ord("b")), (256, 256))
    assert vocab.entries[256] == b"ab"
    assert vocab.entries[257] == b"abab"


def test_train_stops_when_no_pair_repeats():
    # target allows 2 merges but only one pair ever reaches count 2
    vocab = train_bpe(b"aaab", 300)
    assert len(vocab.merges) == 1


def test_every_training_merge_maximizes_pair_count():
    rng = random.Random(9)
    for _ in range(12):
        corpus = bytes(rng.choice(b"abcde ") for _ in range(rng.randrange(8, 160)))
        vocab = train_bpe(corpus, 280)
        # replay training step by step against the brute-force pair counter
        symbols = [bytes([b]) for b in corpus]
        for left, right in vocab.merges:
            best, count = oracles.best_bpe_pairs(symbols)
            chosen = (vocab.entries[left], vocab.entries[right])
            assert count >= 2
            assert chosen in best
            assert chosen == min(best)
            merged: list[bytes] = []
            i = 0
            while i < len(symbols):
                if (
                    i + 1 < len(symbols)
                    and (symbols[i], symbols[i + 1]) == chosen
                ):
                    merged.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged


def test_train_rejects_empty_corpus_and_tiny_targets():
    with pytest.raises(UsageError):
        train_bpe(b"", 300)
    with pytest.raises(UsageError):
        train_bpe(b"abc", 256)


def test_tokenize_empty_is_empty():
    assert tokenize(b"", byte_vocabulary()).tokens == ()


def test_tokenize_applies_merges_in_creation_order():
    vocab = train_bpe(b"abababab", 259)
    assert tokenize(b"abab", vocab).tokens == (257,)
    assert tokenize(b"aabab", vocab).tokens == (ord("a"), 257)
    assert tokenize(b"ab", vocab).tokens == (256,)


def test_tokenize_byte_fallback_is_one_token_per_byte():
    data = bytes(range(256)) * 2
    tokens = tokenize(data, byte_vocabulary()).tokens
    assert tokens == tuple(data)


def test_detokenize_concatenates_entries():
    vocab = train_bpe(b"abababab", 259)
    assert detokenize([256, ord("c")], vocab) == b"abc"
    assert detokenize([], vocab) == b""


def test_detokenize_rejects_out_of_range_ids():
    with pytest.raises(CorruptDataError):
        detokenize([256], byte_vocabulary())


def test_round_trip_on_random_byte_strings(vocab):
    rng = random.Random(31)
    for _ in range(1000):
        data = rng.randbytes(rng.randrange(0, 80))
        assert detokenize(tokenize(data, vocab), vocab) == data


def test_round_trip_on_english(vocab, corpus_texts):
    data = corpus_texts[0].encode("utf-8")
    tokens = tokenize(data, vocab)
    assert detokenize(tokens, vocab) == data
    assert len(tokens) < len(data) / 2, "trained vocabulary should merge English"


def test_save_load_round_trip(tmp_path, tiny_vocab):
    path = str(tmp_path / "vocab.azvb")
    save_vocabulary(tiny_vocab, path)
    loaded = load_vocabulary(path)
    assert loaded == tiny_vocab
    assert loaded.fingerprint == tiny_vocab.fingerprint


def test_fingerprint_tracks_content(tiny_vocab):
    assert byte_vocabulary().fingerprint != tiny_vocab.fingerprint
    assert len(tiny_vocab.fingerprint) == 32


def test_parse_rejects_bad_magic():
    with pytest.raises(CorruptDataError, match="magic"):
        parse_vocabulary(b"NOPE" + bytes(10))


def test_parse_rejects_bad_version(tmp_path, tiny_vocab):
    path = str(tmp_path / "vocab.azvb")
    save_vocabulary(tiny_vocab, path)
    blob = bytearray(open(path, "rb").read())
    blob[4] = 99
    with pytest.raises(CorruptDataError, match="version"):
        parse_vocabulary(bytes(blob))


def test_parse_rejects_truncation_everywhere(tmp_path, tiny_vocab):
    path = str(tmp_path / "vocab.azvb")
    save_vocabulary(tiny_vocab, path)
    blob = open(path, "rb").read()
    for cut in range(len(blob)):
        with pytest.raises(CorruptDataError):
            parse_vocabulary(blob[:cut])


def test_parse_rejects_trailing_bytes(tmp_path, tiny_vocab):
    path = str(tmp_path / "vocab.azvb")
    save_vocabulary(tiny_vocab, path)
    blob = open(path, "rb").read()
    with pytest.raises(CorruptDataError, match="trailing"):
        parse_vocabulary(blob + b"x")


def test_parse_rejects_non_byte_base_entries():
    bad = Vocabulary(entries=(b"zz",) + tuple(bytes([i]) for i in range(1, 256)), merges=())
    from rankzip.tokenizer import VOCAB_MAGIC, VOCAB_VERSION, _serialize_body

    blob = VOCAB_MAGIC + bytes([VOCAB_VERSION]) + _serialize_body(bad)
    with pytest.raises(CorruptDataError):
        parse_vocabulary(blob)


def test_parse_rejects_merge_referencing_later_entry():
    entries = tuple(bytes([i]) for i in range(256)) + (b"ab",)
    bad = Vocabulary(entries=entries, merges=((ord("a"), 400),))
    from rankzip.tokenizer import VOCAB_MAGIC, VOCAB_VERSION, _serialize_body

    blob = VOCAB_MAGIC + bytes([VOCAB_VERSION]) + _serialize_body(bad)
    with pytest.raises(CorruptDataError):
        parse_vocabulary(blob)
