"""Brute-force reference implementations the tests check the library against.

Everything here trades speed for obviousness: exhaustive searches, direct
textbook formulas, and from-scratch replays that share no code with the
package under test.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache


@lru_cache(maxsize=None)
def _optimal_merge_cost(freqs: tuple[int, ...]) -> int:
    """Minimum total cost of merging freqs down to one node, trying all pairs.

    Summing the merged weights over a merge sequence equals sum(f * depth)
    for the tree that sequence builds, so the minimum over every merge order
    is the cost of the best prefix code.
    """
    if len(freqs) <= 1:
        return 0
    best = None
    for i in range(len(freqs)):
        for j in range(i + 1, len(freqs)):
            merged = freqs[i] + freqs[j]
            rest = tuple(
                sorted(f for k, f in enumerate(freqs) if k != i and k != j)
                + [merged]
            )
            cost = merged + _optimal_merge_cost(rest)
            if best is None or cost < best:
                best = cost
    return best


def optimal_prefix_cost(freqs: list[int]) -> int:
    """Cheapest possible sum(freq * code_length) over all binary prefix codes."""
    return _optimal_merge_cost(tuple(sorted(freqs)))


def lz77_reference_parse(
    data: bytes,
    window: int = 32768,
    min_match: int = 3,
    max_match: int = 258,
) -> list[tuple]:
    """Greedy parse by scanning every window position for the longest match.

    Returns ("lit", byte) and ("ref", distance, length) tuples. Ties on
    length keep the smallest distance; matches may overlap their own output.
    """
    out: list[tuple] = []
    i = 0
    n = len(data)
    while i < n:
        best_len = 0
        best_start = -1
        for start in range(max(0, i - window), i):
            length = 0
            limit = min(max_match, n - i)
            while length < limit and data[start + length] == data[i + length]:
                length += 1
            # >= keeps the latest (closest) start among equal lengths.
            if length >= best_len:
                best_len = length
                best_start = start
        if best_len >= min_match:
            out.append(("ref", i - best_start, best_len))
            i += best_len
        else:
            out.append(("lit", data[i]))
            i += 1
    return out


def byte_entropy(data: bytes) -> float:
    """Shannon entropy of the byte histogram, straight from the formula."""
    if not data:
        return 0.0
    counts = Counter(data)
    total = len(data)
    return -sum(
        (c / total) * math.log2(c / total) for c in counts.values()
    )


def varint_reference(values: list[int]) -> bytes:
    """LEB128 with continuation in the high bit, least significant group first."""
    out = bytearray()
    for value in values:
        while True:
            group = value & 0x7F
            value >>= 7
            if value:
                out.append(group | 0x80)
            else:
                out.append(group)
                break
    return bytes(out)


def adaptive_arithmetic_cost_bits(data: bytes) -> float:
    """Sum of -log2 p over the coded sequence under the documented byte model.

    Replays the model from its published parameters: 257 symbols (256 bytes
    plus end marker), all frequencies start at 1, the coded symbol gains 2,
    and every frequency halves as (f + 1) >> 1 once the total would pass
    2^16. The end marker is coded once at the end and its cost is included.
    """
    freqs = [1] * 257
    total = 257
    cost = 0.0
    for byte in data:
        cost += -math.log2(freqs[byte] / total)
        freqs[byte] += 2
        total += 2
        if total + 2 > 1 << 16:
            total = 0
            for s in range(257):
                freqs[s] = (freqs[s] + 1) >> 1
                total += freqs[s]
    return cost + -math.log2(freqs[256] / total)


def best_bpe_pairs(symbols: list[bytes]) -> tuple[set[tuple[bytes, bytes]], int]:
    """All adjacent pairs with maximal count (overlaps counted), plus the count."""
    counts: Counter = Counter()
    for left, right in zip(symbols, symbols[1:]):
        counts[(left, right)] += 1
    if not counts:
        return set(), 0
    top = max(counts.values())
    return {pair for pair, c in counts.items() if c == top}, top


def predictor_scores_from_scratch(
    prefix: list[int],
    vocab_size: int,
    order: int,
    window: int,
    batch_width: int = 1,
) -> list[int]:
    """Recompute next-step scores from the whole prefix, no incremental state.

    Only tokens up to the last full batch are committed; counting for depth j
    at committed position i needs j context tokens inside both the stream and
    the window. Scores weight depth-j counts by 256^j.
    """
    committed_n = len(prefix) - (len(prefix) % batch_width)
    committed = prefix[:committed_n]
    counts: dict[int, dict[tuple[int, ...], Counter]] = {
        j: {} for j in range(order + 1)
    }
    for i, token in enumerate(committed):
        for j in range(order + 1):
            if j <= min(window, i):
                suffix = tuple(committed[i - j : i])
                counts[j].setdefault(suffix, Counter())[token] += 1
    context = tuple(committed[max(0, committed_n - window) :])
    scores = [0] * vocab_size
    for j in range(order + 1):
        if j <= len(context):
            suffix = context[len(context) - j :]
            for token, count in counts[j].get(suffix, Counter()).items():
                scores[token] += count * (256 ** j)
    return scores


def predictor_ranking_from_scratch(
    prefix: list[int],
    vocab_size: int,
    order: int,
    window: int,
    batch_width: int = 1,
) -> list[int]:
    """Token ids best-first: score descending, id ascending on ties."""
    scores = predictor_scores_from_scratch(
        prefix, vocab_size, order, window, batch_width
    )
    return sorted(range(vocab_size), key=lambda t: (-scores[t], t))


def audit_fgk_tree(tree) -> None:
    """Assert the structural invariants of an adaptive Huffman tree.

    Checks the sibling property (nodes in ascending number order have
    non-decreasing weights, siblings hold adjacent numbers below their
    parent's) and basic consistency: numbers contiguous from the root down,
    child/parent links mutual, internal weights equal to the sum of their
    children.
    """
    live = [
        node
        for node in range(len(tree.parent))
        if node == tree.root or tree.parent[node] != -1
    ]
    numbers = sorted(tree.number[node] for node in live)
    top = max(numbers)
    assert numbers == list(range(top - len(live) + 1, top + 1)), "numbers not contiguous"
    by_number = {tree.number[node]: node for node in live}
    weights_ascending = [tree.weight[by_number[num]] for num in numbers]
    assert weights_ascending == sorted(weights_ascending), "sibling property: weights out of order"
    for node in live:
        left, right = tree.left[node], tree.right[node]
        assert (left == -1) == (right == -1), "half-linked internal node"
        if left != -1:
            assert tree.parent[left] == node and tree.parent[right] == node
            assert tree.weight[node] == tree.weight[left] + tree.weight[right]
            assert abs(tree.number[left] - tree.number[right]) == 1, "siblings not adjacent"
            assert tree.number[node] > tree.number[left]
            assert tree.number[node] > tree.number[right]
