"""Adaptive Huffman coder (FGK).

The code tree starts as a lone not-yet-transmitted (NYT) node and reshapes
itself after every symbol; encoder and decoder run the identical update so
their trees never diverge. A first occurrence is sent as the NYT path plus an
8-bit literal; later occurrences send the leaf path alone. Node numbers
descend from the root as leaves split off, and the rebalancing rule is the
classic one: before a node's weight rises, swap it with the highest-numbered
node of equal weight unless that node is its parent.

The stream is a 4-byte magic and version byte, an 8-byte symbol count, then
path bits MSB-first.

The AdaptiveHuffmanTree class is the readable reference used by the tests'
lockstep oracle; the module-level kernels replicate it array-for-array for
bulk throughput, and equivalence of the two is property-tested.
"""

from __future__ import annotations

import struct

import numpy as np

from .._fast import kernel
from ..errors import CorruptDataError

STREAM_MAGIC = b"AZAH"
STREAM_VERSION = 1

_HEADER = struct.Struct("<Q")

# 256 possible leaves + NYT + up to 256 internals.
_MAX_NODES = 513
_ROOT_NUMBER = 513
_INTERNAL = -1
_NYT = -2


class AdaptiveHuffmanTree:
    """Reference FGK tree; one instance per direction, updated per symbol."""

    def __init__(self) -> None:
        self.parent = [-1] * (_MAX_NODES + 1)
        self.left = [-1] * (_MAX_NODES + 1)
        self.right = [-1] * (_MAX_NODES + 1)
        self.weight = [0] * (_MAX_NODES + 1)
        self.symbol = [_INTERNAL] * (_MAX_NODES + 1)
        self.number = [0] * (_MAX_NODES + 1)
        self.node_at_number = [0] * (_ROOT_NUMBER + 1)
        self.leaf_of = [-1] * 256
        self.next_node = 2
        self.nyt = 1
        self.root = 1
        self.symbol[1] = _NYT
        self.number[1] = _ROOT_NUMBER
        self.node_at_number[_ROOT_NUMBER] = 1

    def path_bits(self, node: int) -> list[int]:
        bits: list[int] = []
        while self.parent[node] != -1:
            up = self.parent[node]
            bits.append(0 if self.left[up] == node else 1)
            node = up
        bits.reverse()
        return bits

    def encode_symbol(self, value: int) -> list[int]:
        leaf = self.leaf_of[value]
        if leaf != -1:
            bits = self.path_bits(leaf)
        else:
            bits = self.path_bits(self.nyt)
            bits.extend((value >> b) & 1 for b in range(7, -1, -1))
        self.update(value)
        return bits

    def update(self, value: int) -> None:
        leaf = self.leaf_of[value]
        if leaf == -1:
            leaf = self._split_nyt(value)
        node = leaf
        while node != -1:
            leader = self._block_leader(node)
            if leader != node and leader != self.parent[node]:
                self._swap(node, leader)
            self.weight[node] += 1
            node = self.parent[node]

    def _split_nyt(self, value: int) -> int:
        old = self.nyt
        new_nyt = self.next_node
        new_leaf = self.next_node + 1
        self.next_node += 2
        old_number = self.number[old]
        for node, num, sym in (
            (new_nyt, old_number - 2, _NYT),
            (new_leaf, old_number - 1, value),
        ):
            self.parent[node] = old
            self.left[node] = self.right[node] = -1
            self.weight[node] = 0
            self.symbol[node] = sym
            self.number[node] = num
            self.node_at_number[num] = node
        self.left[old] = new_nyt
        self.right[old] = new_leaf
        self.symbol[old] = _INTERNAL
        self.nyt = new_nyt
        self.leaf_of[value] = new_leaf
        return new_leaf

    def _block_leader(self, node: int) -> int:
        w = self.weight[node]
        num = self.number[node]
        while num + 1 <= _ROOT_NUMBER:
            candidate = self.node_at_number[num + 1]
            if candidate == 0 or self.weight[candidate] != w:
                break
            num += 1
        return self.node_at_number[num]

    def _swap(self, a: int, b: int) -> None:
        pa, pb = self.parent[a], self.parent[b]
        if self.left[pa] == a:
            self.left[pa] = b
        else:
            self.right[pa] = b
        if self.left[pb] == b:
            self.left[pb] = a
        else:
            self.right[pb] = a
        self.parent[a], self.parent[b] = pb, pa
        na, nb = self.number[a], self.number[b]
        self.number[a], self.number[b] = nb, na
        self.node_at_number[na] = b
        self.node_at_number[nb] = a

    def decode_symbol(self, read_bit) -> int:
        node = self.root
        while self.symbol[node] == _INTERNAL:
            node = self.left[node] if read_bit() == 0 else self.right[node]
        if self.symbol[node] == _NYT:
            value = 0
            for _ in range(8):
                value = (value << 1) | read_bit()
        else:
            value = self.symbol[node]
        self.update(value)
        return value

    def signature(self) -> tuple:
        """Shape, weights, and numbering; equal iff the trees are identical."""

        def walk(node: int) -> tuple:
            if self.symbol[node] != _INTERNAL:
                return (self.symbol[node], self.weight[node], self.number[node])
            return (
                _INTERNAL,
                self.weight[node],
                self.number[node],
                walk(self.left[node]),
                walk(self.right[node]),
            )

        return walk(self.root)


@kernel
def _fgk_encode(data, out):
    parent = np.full(_MAX_NODES + 1, -1, np.int64)
    left = np.full(_MAX_NODES + 1, -1, np.int64)
    right = np.full(_MAX_NODES + 1, -1, np.int64)
    weight = np.zeros(_MAX_NODES + 1, np.int64)
    symbol = np.full(_MAX_NODES + 1, _INTERNAL, np.int64)
    number = np.zeros(_MAX_NODES + 1, np.int64)
    node_at = np.zeros(_ROOT_NUMBER + 1, np.int64)
    leaf_of = np.full(256, -1, np.int64)
    path = np.zeros(_MAX_NODES, np.int64)
    next_node = np.int64(2)
    nyt = np.int64(1)
    symbol[1] = _NYT
    number[1] = _ROOT_NUMBER
    node_at[_ROOT_NUMBER] = 1
    bit_buffer = np.int64(0)
    bit_count = np.int64(0)
    position = np.int64(0)
    for i in range(data.shape[0]):
        value = np.int64(data[i])
        leaf = leaf_of[value]
        start = leaf if leaf != -1 else nyt
        depth = np.int64(0)
        node = start
        while parent[node] != -1:
            up = parent[node]
            path[depth] = 0 if left[up] == node else 1
            depth += 1
            node = up
        for d in range(depth - 1, -1, -1):
            bit_buffer = (bit_buffer << 1) | path[d]
            bit_count += 1
            if bit_count == 8:
                out[position] = bit_buffer
                position += 1
                bit_buffer = np.int64(0)
                bit_count = np.int64(0)
        if leaf == -1:
            for b in range(7, -1, -1):
                bit_buffer = (bit_buffer << 1) | ((value >> b) & 1)
                bit_count += 1
                if bit_count == 8:
                    out[position] = bit_buffer
                    position += 1
                    bit_buffer = np.int64(0)
                    bit_count = np.int64(0)
            old = nyt
            new_nyt = next_node
            new_leaf = next_node + 1
            next_node += 2
            old_number = number[old]
            parent[new_nyt] = old
            weight[new_nyt] = 0
            symbol[new_nyt] = _NYT
            number[new_nyt] = old_number - 2
            node_at[old_number - 2] = new_nyt
            parent[new_leaf] = old
            weight[new_leaf] = 0
            symbol[new_leaf] = value
            number[new_leaf] = old_number - 1
            node_at[old_number - 1] = new_leaf
            left[old] = new_nyt
            right[old] = new_leaf
            symbol[old] = _INTERNAL
            nyt = new_nyt
            leaf_of[value] = new_leaf
            leaf = new_leaf
        node = leaf
        while node != -1:
            w = weight[node]
            num = number[node]
            while num + 1 <= _ROOT_NUMBER:
                candidate = node_at[num + 1]
                if candidate == 0 or weight[candidate] != w:
                    break
                num += 1
            leader = node_at[num]
            if leader != node and leader != parent[node]:
                pa = parent[node]
                pb = parent[leader]
                if left[pa] == node:
                    left[pa] = leader
                else:
                    right[pa] = leader
                if left[pb] == leader:
                    left[pb] = node
                else:
                    right[pb] = node
                parent[node] = pb
                parent[leader] = pa
                na = number[node]
                nb = number[leader]
                number[node] = nb
                number[leader] = na
                node_at[na] = leader
                node_at[nb] = node
            weight[node] += 1
            node = parent[node]
    if bit_count > 0:
        out[position] = bit_buffer << (8 - bit_count)
        position += 1
    return position


@kernel
def _fgk_decode(payload, count, out):
    parent = np.full(_MAX_NODES + 1, -1, np.int64)
    left = np.full(_MAX_NODES + 1, -1, np.int64)
    right = np.full(_MAX_NODES + 1, -1, np.int64)
    weight = np.zeros(_MAX_NODES + 1, np.int64)
    symbol = np.full(_MAX_NODES + 1, _INTERNAL, np.int64)
    number = np.zeros(_MAX_NODES + 1, np.int64)
    node_at = np.zeros(_ROOT_NUMBER + 1, np.int64)
    leaf_of = np.full(256, -1, np.int64)
    next_node = np.int64(2)
    nyt = np.int64(1)
    root = np.int64(1)
    symbol[1] = _NYT
    number[1] = _ROOT_NUMBER
    node_at[_ROOT_NUMBER] = 1
    bit_position = np.int64(0)
    total_bits = np.int64(payload.shape[0]) * 8
    for i in range(count):
        node = root
        while symbol[node] == _INTERNAL:
            if bit_position >= total_bits:
                return np.int64(i)
            bit = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
            bit_position += 1
            node = left[node] if bit == 0 else right[node]
        if symbol[node] == _NYT:
            if bit_position + 8 > total_bits:
                return np.int64(i)
            value = np.int64(0)
            for _ in range(8):
                bit = (payload[bit_position >> 3] >> (7 - (bit_position & 7))) & 1
                bit_position += 1
                value = (value << 1) | bit
        else:
            value = symbol[node]
        out[i] = value
        leaf = leaf_of[value]
        if leaf == -1:
            old = nyt
            new_nyt = next_node
            new_leaf = next_node + 1
            next_node += 2
            old_number = number[old]
            parent[new_nyt] = old
            weight[new_nyt] = 0
            symbol[new_nyt] = _NYT
            number[new_nyt] = old_number - 2
            node_at[old_number - 2] = new_nyt
            parent[new_leaf] = old
            weight[new_leaf] = 0
            symbol[new_leaf] = value
            number[new_leaf] = old_number - 1
            node_at[old_number - 1] = new_leaf
            left[old] = new_nyt
            right[old] = new_leaf
            symbol[old] = _INTERNAL
            nyt = new_nyt
            leaf_of[value] = new_leaf
            leaf = new_leaf
        node = leaf
        while node != -1:
            w = weight[node]
            num = number[node]
            while num + 1 <= _ROOT_NUMBER:
                candidate = node_at[num + 1]
                if candidate == 0 or weight[candidate] != w:
                    break
                num += 1
            leader = node_at[num]
            if leader != node and leader != parent[node]:
                pa = parent[node]
                pb = parent[leader]
                if left[pa] == node:
                    left[pa] = leader
                else:
                    right[pa] = leader
                if left[pb] == leader:
                    left[pb] = node
                else:
                    right[pb] = node
                parent[node] = pb
                parent[leader] = pa
                na = number[node]
                nb = number[leader]
                number[node] = nb
                number[leader] = na
                node_at[na] = leader
                node_at[nb] = node
            weight[node] += 1
            node = parent[node]
    return np.int64(-1)


def compress(data: bytes) -> bytes:
    header = STREAM_MAGIC + bytes([STREAM_VERSION]) + _HEADER.pack(len(data))
    if not data:
        return header
    # Worst case is one full-depth path plus a literal per symbol.
    out = np.zeros(len(data) * 34 + 64, dtype=np.uint8)
    used = _fgk_encode(np.frombuffer(data, dtype=np.uint8), out)
    return header + out[: int(used)].tobytes()


def decompress(data: bytes) -> bytes:
    if len(data) < 5 + _HEADER.size:
        raise CorruptDataError("adaptive huffman stream shorter than its header")
    if data[:4] != STREAM_MAGIC:
        raise CorruptDataError("not an adaptive huffman stream (bad magic)")
    if data[4] != STREAM_VERSION:
        raise CorruptDataError(
            f"unsupported adaptive huffman stream version {data[4]}"
        )
    (count,) = _HEADER.unpack_from(data, 5)
    if count == 0:
        return b""
    payload = np.frombuffer(data[5 + _HEADER.size :], dtype=np.uint8)
    out = np.zeros(count, dtype=np.uint8)
    failed_at = _fgk_decode(payload, count, out)
    if int(failed_at) >= 0:
        raise CorruptDataError(
            f"adaptive huffman payload exhausted at symbol {int(failed_at)}"
        )
    return out.tobytes()
