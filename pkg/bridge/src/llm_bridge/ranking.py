"""Deterministic ordering of the vocabulary behind every reply.

The full ordering sorts token ids by logit, highest first, breaking exact
ties in favour of the lower id. A reply carries the first top-m entries of
that ordering; ranks past the cutoff fall back to ascending id order among
the remaining tokens, which is the arrangement the encoding client assumes.

Orderings are cached per context, so repeating a query — as a decoder
replaying an encoder's traffic does — costs a lookup instead of a forward
pass and is guaranteed byte-identical.
"""

from __future__ import annotations

import threading
from collections import OrderedDict

import numpy as np


class RankingEngine:
    """Shared by the TCP server and the offline file ranker."""

    def __init__(self, scorer, top_m: int, cache_entries: int = 8192):
        if top_m < 1:
            raise ValueError("top_m must be at least 1")
        self.scorer = scorer
        self.vocab_size = int(scorer.vocab_size)
        self.window = int(scorer.window)
        self.top_m = min(int(top_m), self.vocab_size)
        self._ids = np.arange(self.vocab_size)
        self._cache: OrderedDict[tuple[int, ...], np.ndarray] = OrderedDict()
        self._cache_entries = cache_entries
        self._lock = threading.Lock()

    def full_order(self, context: tuple[int, ...]) -> np.ndarray:
        """Every token id, best rank first; cached per context."""
        with self._lock:
            order = self._cache.get(context)
            if order is None:
                logits = np.asarray(self.scorer.logits(context), dtype=np.float32)
                order = np.lexsort((self._ids, -logits)).astype(np.int32)
                order.setflags(write=False)
                self._cache[context] = order
                if len(self._cache) > self._cache_entries:
                    self._cache.popitem(last=False)
            else:
                self._cache.move_to_end(context)
            return order

    def tops(self, context: tuple[int, ...]) -> np.ndarray:
        return self.full_order(context)[: self.top_m]

    def rank_of(self, context: tuple[int, ...], token: int) -> int:
        """Rank a stream encoder records for ``token`` after ``context``:
        its position when inside the served prefix, otherwise its id-order
        position among the tokens past the cutoff."""
        tops = self.tops(context)
        hits = np.nonzero(tops == token)[0]
        if hits.size:
            return int(hits[0])
        return self.top_m + token - int(np.count_nonzero(tops < token))
