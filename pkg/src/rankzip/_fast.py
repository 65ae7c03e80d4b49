"""Compiled streaming kernels for the builtin predictor.

One fused loop per direction replays the reference model exactly: dense
order-0 counts plus adjacency-list tries for orders 1..k, scores combined as
count * 256^j, ties resolved toward the smaller token id. Child stores are
sized to one slot per step and order (the exact worst case), never capped, so
a stream encoded here decodes identically on the pure-Python reference path
and vice versa.

Only individual-mode inference is fused; batch mode always runs the
reference implementation. When numba is unavailable HAVE_NUMBA is False and
callers must fall back to the reference path.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    from numba.core import types
    from numba.typed import Dict

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - sandbox always has numba
    HAVE_NUMBA = False


def kernel(fn):
    """Compile fn when numba is present; otherwise run it as plain Python.

    Decorated functions must restrict themselves to numpy arrays and scalars
    so both execution modes compute identical results.
    """
    if HAVE_NUMBA:
        return njit(cache=True)(fn)
    return fn

SCORE_BASE_BITS = 8  # weight base 256 = 1 << 8


def _plan_shifts(n: int, vocab_size: int, order: int) -> tuple[int, int]:
    """Bit widths for context keys and score/id sort keys, with overflow guards."""
    id_bits = max(1, int(vocab_size - 1).bit_length())
    if order * id_bits > 62:
        raise OverflowError("order * log2(vocab) too large for packed context keys")
    # score < (order+1) * n * 256^order; the sort key shifts scores by id_bits.
    score_bound_bits = (order + 1).bit_length() + max(1, n).bit_length() + SCORE_BASE_BITS * order
    if score_bound_bits + id_bits > 62:
        raise OverflowError("score bound too large for packed sort keys")
    return id_bits, id_bits


if HAVE_NUMBA:

    @njit(cache=True)
    def _stream(values, vocab_size, order, ctx_bits, key_bits, decode):
        n = values.shape[0]
        out = np.empty(n, np.int64)
        hist = np.empty(n, np.int64)
        c0 = np.zeros(vocab_size, np.int64)
        scores = np.zeros(vocab_size, np.int64)
        keys = np.empty(vocab_size, np.int64)
        # Tokens never seen all score zero and therefore sort below every
        # seen token, in ascending id order. Tracking the seen set lets each
        # step touch only those tokens instead of the whole vocabulary.
        seen = np.zeros(vocab_size, np.uint8)
        seen_ids = np.empty(vocab_size, np.int64)
        seen_count = 0
        depth = max(order, 1)
        maps = [Dict.empty(types.int64, types.int64) for _ in range(depth)]
        syms = np.empty((depth, n + 1), np.int32)
        cnts = np.empty((depth, n + 1), np.int64)
        nxts = np.empty((depth, n + 1), np.int32)
        used = np.zeros(depth, np.int64)
        mask = (np.int64(1) << key_bits) - 1
        for i in range(n):
            for s in range(seen_count):
                v = seen_ids[s]
                scores[v] = c0[v]
            for j in range(1, order + 1):
                if i < j:
                    break
                ctx = np.int64(0)
                for x in range(j):
                    ctx = (ctx << ctx_bits) | hist[i - 1 - x]
                if ctx in maps[j - 1]:
                    p = maps[j - 1][ctx]
                else:
                    p = np.int64(-1)
                weight = np.int64(1) << (SCORE_BASE_BITS * j)
                while p >= 0:
                    scores[syms[j - 1, p]] += cnts[j - 1, p] * weight
                    p = nxts[j - 1, p]
            if decode:
                rank = values[i]
                if rank < 0 or rank >= vocab_size:
                    return out, i
                if rank < seen_count:
                    for s in range(seen_count):
                        v = seen_ids[s]
                        keys[s] = (scores[v] << key_bits) - v
                    kth = np.partition(keys[:seen_count], seen_count - 1 - rank)[
                        seen_count - 1 - rank
                    ]
                    token = ((np.int64(1) << key_bits) - (kth & mask)) & mask
                else:
                    # The (rank - seen_count)-th smallest unseen id.
                    remaining = rank - seen_count
                    token = np.int64(0)
                    for v in range(vocab_size):
                        if seen[v] == 0:
                            if remaining == 0:
                                token = np.int64(v)
                                break
                            remaining -= 1
                out[i] = token
            else:
                token = values[i]
                if seen[token] == 1:
                    target = scores[token]
                    rank = 0
                    for s in range(seen_count):
                        v = seen_ids[s]
                        sc = scores[v]
                        if sc > target or (sc == target and v < token):
                            rank += 1
                else:
                    below = 0
                    for s in range(seen_count):
                        if seen_ids[s] < token:
                            below += 1
                    rank = seen_count + token - below
                out[i] = rank
            hist[i] = token
            c0[token] += 1
            if seen[token] == 0:
                seen[token] = 1
                seen_ids[seen_count] = token
                seen_count += 1
            for j in range(1, order + 1):
                if i < j:
                    break
                ctx = np.int64(0)
                for x in range(j):
                    ctx = (ctx << ctx_bits) | hist[i - 1 - x]
                if ctx in maps[j - 1]:
                    head = maps[j - 1][ctx]
                else:
                    head = np.int64(-1)
                p = head
                found = False
                while p >= 0:
                    if syms[j - 1, p] == token:
                        cnts[j - 1, p] += 1
                        found = True
                        break
                    p = nxts[j - 1, p]
                if not found:
                    slot = used[j - 1]
                    syms[j - 1, slot] = np.int32(token)
                    cnts[j - 1, slot] = 1
                    nxts[j - 1, slot] = np.int32(head)
                    maps[j - 1][ctx] = slot
                    used[j - 1] = slot + 1
        return out, np.int64(-1)

    def encode_stream(tokens: np.ndarray, vocab_size: int, order: int) -> np.ndarray:
        ctx_bits, key_bits = _plan_shifts(len(tokens), vocab_size, order)
        out, _ = _stream(
            np.ascontiguousarray(tokens, dtype=np.int64),
            vocab_size,
            order,
            ctx_bits,
            key_bits,
            False,
        )
        return out

    def decode_stream(ranks: np.ndarray, vocab_size: int, order: int) -> tuple[np.ndarray, int]:
        """Returns (tokens, error_index); error_index is -1 when all ranks were valid."""
        ctx_bits, key_bits = _plan_shifts(len(ranks), vocab_size, order)
        out, err = _stream(
            np.ascontiguousarray(ranks, dtype=np.int64),
            vocab_size,
            order,
            ctx_bits,
            key_bits,
            True,
        )
        return out, int(err)

else:  # pragma: no cover - sandbox always has numba
    encode_stream = None
    decode_stream = None
