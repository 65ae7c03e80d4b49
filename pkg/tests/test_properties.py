"""Property tests: randomized laws every layer must hold unconditionally."""

from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rankzip import _fast
from rankzip.coders import CODER_NAMES, get_coder, lz77
from rankzip.coders.adaptive_huffman import AdaptiveHuffmanTree
from rankzip.coders.arithmetic import model_cost_bits
from rankzip.metrics import bits_per_character, compression_ratio
from rankzip.predictor import BuiltinPredictor, builtin_descriptor, token_at_rank, token_rank
from rankzip.rank_codec import deserialize_ranks, serialize_ranks
from rankzip.tokenizer import byte_vocabulary, detokenize, tokenize

BLOBS = st.binary(max_size=400)
SMALL_TEXT = st.text(
    alphabet=st.characters(codec="utf-8", exclude_characters="\udc80"),
    max_size=300,
)


@given(BLOBS)
def test_tokenize_round_trips_and_never_expands(vocab, data):
    tokens = tokenize(data, vocab)
    assert detokenize(tokens, vocab) == data
    assert len(tokens) <= len(data)


@given(st.binary(min_size=1, max_size=200), st.integers(0, 3))
def test_ranking_is_a_permutation(context, order):
    predictor = BuiltinPredictor(builtin_descriptor(order=order, window=64), 256)
    for token in context:
        predictor.rank_next()
        predictor.advance(token)
    ranking = predictor.rank_next()
    assert sorted(ranking.ordered) == list(range(256))


@given(st.binary(min_size=0, max_size=120))
def test_predictor_state_is_a_pure_function_of_the_prefix(prefix):
    descriptor = builtin_descriptor(order=2, window=32)
    first = BuiltinPredictor(descriptor, 256)
    second = BuiltinPredictor(descriptor, 256)
    for token in prefix:
        for predictor in (first, second):
            predictor.rank_next()
            predictor.advance(token)
    assert first.rank_next().ordered == second.rank_next().ordered
    assert first.committed_context() == second.committed_context()


@given(st.lists(st.integers(0, 199), min_size=1, max_size=60, unique=True))
def test_token_rank_and_token_at_rank_are_inverse(tops):
    predictor = BuiltinPredictor(builtin_descriptor(order=1, window=16), 200)
    ranking = predictor.rank_next()
    for token in tops:
        rank = token_rank(ranking, token)
        assert token_at_rank(ranking, rank) == token


@settings(deadline=None)
@given(st.lists(st.integers(0, 255), max_size=300), st.integers(0, 3))
def test_fused_and_reference_rank_streams_agree(tokens, order):
    descriptor = builtin_descriptor(order=order, window=100)
    if not _fast.HAVE_NUMBA:
        return
    stream = np.asarray(tokens, dtype=np.int64)
    fused = _fast.encode_stream(stream, 256, order)
    predictor = BuiltinPredictor(descriptor, 256)
    reference = []
    for token in tokens:
        ranking = predictor.rank_next()
        reference.append(token_rank(ranking, token))
        predictor.advance(token)
    assert list(fused) == reference
    decoded, err = _fast.decode_stream(np.asarray(reference, dtype=np.int64), 256, order)
    assert int(err) < 0
    assert list(decoded) == tokens


@settings(deadline=None)
@given(st.lists(st.integers(0, 2 ** 40), max_size=200))
def test_varint_serialization_round_trips(values):
    from rankzip.rank_codec import RankStream

    stream = RankStream(
        ranks=tuple(values),
        token_count=len(values),
        predictor_fingerprint=b"\x00" * 32,
        vocab_fingerprint=b"\x00" * 32,
    )
    for mode in ("varint", "ascii-dot"):
        blob = serialize_ranks(stream, mode)
        assert deserialize_ranks(blob, mode).ranks == tuple(values)
    assert serialize_ranks(stream, "varint") == bytes(oracles.varint_reference(values))


@settings(deadline=None, max_examples=40)
@given(BLOBS)
def test_every_coder_round_trips_arbitrary_bytes(data):
    for name in CODER_NAMES:
        coder = get_coder(name)
        assert coder.decompress(coder.compress(data)) == data


@settings(deadline=None, max_examples=60)
@given(st.binary(max_size=256))
def test_arithmetic_stays_within_64_bits_of_its_model(data):
    from rankzip.coders.arithmetic import compress

    bits = (len(compress(data)) - 5) * 8
    ideal = model_cost_bits(data)
    assert abs(bits - ideal) <= 64


@settings(deadline=None, max_examples=40)
@given(st.lists(st.integers(0, 7), max_size=400))
def test_adaptive_huffman_tree_audit_after_every_update(symbols):
    tree = AdaptiveHuffmanTree()
    for symbol in symbols:
        tree.encode_symbol(symbol)
        oracles.audit_fgk_tree(tree)


@given(BLOBS)
def test_lz77_tokens_always_satisfy_their_invariants(data):
    emitted = 0
    for token in lz77.parse_tokens(lz77.compress(data)):
        if token.distance == 0:
            assert 0 <= token.literal <= 255
            emitted += 1
        else:
            assert 1 <= token.distance <= lz77.WINDOW_SIZE
            assert lz77.MIN_MATCH <= token.length <= lz77.MAX_MATCH
            assert token.distance <= emitted
            emitted += token.length
    assert emitted == len(data)


@given(st.text(alphabet=st.characters(min_codepoint=0x20, max_codepoint=0x7E), min_size=1, max_size=300))
def test_ratio_times_bpc_is_eight_on_ascii(text):
    data = text.encode("ascii")
    compressed_size = max(1, len(data) // 3)
    product = compression_ratio(len(data), compressed_size) * bits_per_character(
        compressed_size, len(text)
    )
    assert abs(product - 8.0) < 1e-9


def test_order3_beats_order0_at_rank_zero_on_english(vocab, corpus_texts):
    from rankzip.rank_codec import encode_ranks

    text = corpus_texts[0].encode("utf-8")[:40_000]
    zero_fractions = {}
    for order in (0, 3):
        descriptor = builtin_descriptor(order=order)
        stream = encode_ranks(text, descriptor, vocab)
        zero_fractions[order] = stream.ranks.count(0) / stream.token_count
    assert zero_fractions[3] > zero_fractions[0]
