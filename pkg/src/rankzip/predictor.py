"""Deterministic next-token ranking.

The built-in model scores candidates by adaptive context counts over orders
0..k combined as score(t) = sum_j count_j(t | last j tokens) * B^j with
B = 256, so longer contexts dominate strictly and all arithmetic stays in
integers. Candidates order by (score descending, token id ascending); that
total order is what makes encode and decode mirror each other exactly.

Two inference modes exist. Individual mode re-ranks after every observed
token. Batch mode freezes the model snapshot and ranks the next batch_width
tokens against it, committing the observations only at batch boundaries; the
decoder replays the identical schedule.

External predictors are reached over a line protocol and reply with their
top-m ranking plus the rule that every unlisted token follows in ascending
token id order, which keeps the full ranking reconstructible on this side.
"""

from __future__ import annotations

import hashlib
import socket
from collections import deque
from dataclasses import dataclass

from .errors import (
    CorruptDataError,
    FingerprintMismatchError,
    TransportError,
    UsageError,
)

SCORE_BASE = 256
PROTOCOL_VERSION = 1

DEFAULT_ORDER = 3
DEFAULT_WINDOW = 100


@dataclass(frozen=True)
class PredictorDescriptor:
    kind: str  # "builtin" or "external"
    order: int = DEFAULT_ORDER
    window: int = DEFAULT_WINDOW
    mode: str = "individual"  # or "batch"
    batch_width: int = 1
    address: str | None = None  # external only

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "external"):
            raise UsageError(f"unknown predictor kind {self.kind!r}")
        if self.mode not in ("individual", "batch"):
            raise UsageError(f"unknown inference mode {self.mode!r}")
        if self.order < 0:
            raise UsageError("model order must be non-negative")
        if self.window < 1:
            raise UsageError("context window must be positive")
        if self.batch_width < 1:
            raise UsageError("batch width must be positive")
        if self.kind == "external" and not self.address:
            raise UsageError("external predictor needs an address")

    @property
    def id(self) -> str:
        if self.kind == "builtin":
            return f"builtin-k{self.order}"
        return f"external:{self.address}"

    def builtin_fingerprint(self, vocab_size: int) -> bytes:
        """Identity of the ranking behavior; any parameter change changes it."""
        text = (
            f"builtin|order={self.order}|base={SCORE_BASE}|window={self.window}"
            f"|mode={self.mode}|batch={self.batch_width}|vocab={vocab_size}"
            f"|tie=score-desc,id-asc"
        )
        return hashlib.sha256(text.encode("ascii")).digest()


def builtin_descriptor(
    order: int = DEFAULT_ORDER,
    window: int = DEFAULT_WINDOW,
    mode: str = "individual",
    batch_width: int = 1,
) -> PredictorDescriptor:
    return PredictorDescriptor(
        kind="builtin", order=order, window=window, mode=mode, batch_width=batch_width
    )


def external_descriptor(address: str, window: int = DEFAULT_WINDOW) -> PredictorDescriptor:
    return PredictorDescriptor(kind="external", window=window, address=address)


@dataclass(frozen=True)
class Ranking:
    """Full permutation of token ids, most probable first."""

    ordered: tuple[int, ...]


@dataclass(frozen=True)
class TopRestRanking:
    """Server-shaped ranking: explicit top-m, everything else in id order."""

    tops: tuple[int, ...]
    vocab_size: int

    @property
    def top_index(self) -> dict[int, int]:
        return {t: i for i, t in enumerate(self.tops)}


def token_rank(ranking: Ranking | TopRestRanking, actual: int) -> int:
    if isinstance(ranking, Ranking):
        return ranking.ordered.index(actual)
    index = ranking.top_index.get(actual)
    if index is not None:
        return index
    below = sum(1 for t in ranking.tops if t < actual)
    return len(ranking.tops) + actual - below


def token_at_rank(ranking: Ranking | TopRestRanking, rank: int) -> int:
    size = len(ranking.ordered) if isinstance(ranking, Ranking) else ranking.vocab_size
    if not 0 <= rank < size:
        raise CorruptDataError(f"rank {rank} outside vocabulary of {size}")
    if isinstance(ranking, Ranking):
        return ranking.ordered[rank]
    if rank < len(ranking.tops):
        return ranking.tops[rank]
    # The (rank - m)-th smallest id not named in tops.
    candidate = rank - len(ranking.tops)
    for t in sorted(ranking.tops):
        if t <= candidate:
            candidate += 1
    return candidate


class BuiltinPredictor:
    """Reference implementation of the count-based ranking model.

    Committed counts and the context window only ever reflect tokens up to the
    last batch boundary; observations in between wait in `pending`. Individual
    mode is the batch_width=1 special case where every token commits at once.
    """

    def __init__(self, descriptor: PredictorDescriptor, vocab_size: int) -> None:
        if descriptor.kind != "builtin":
            raise UsageError("descriptor is not for the builtin predictor")
        self.descriptor = descriptor
        self.vocab_size = vocab_size
        self.step = 0
        # counts[j] maps a length-j context tuple to {token: count}.
        self._counts: list[dict[tuple[int, ...], dict[int, int]]] = [
            {} for _ in range(descriptor.order + 1)
        ]
        self._context: deque[int] = deque(maxlen=descriptor.window)
        self._pending: list[int] = []

    @property
    def fingerprint(self) -> bytes:
        return self.descriptor.builtin_fingerprint(self.vocab_size)

    def scores(self) -> list[int]:
        result = [0] * self.vocab_size
        context = tuple(self._context)
        for j in range(self.descriptor.order + 1):
            if j > len(context):
                break
            suffix = context[len(context) - j :]
            table = self._counts[j].get(suffix)
            if table:
                weight = SCORE_BASE**j
                for token, count in table.items():
                    result[token] += count * weight
        return result

    def rank_next(self) -> Ranking:
        scores = self.scores()
        ordered = sorted(range(self.vocab_size), key=lambda t: (-scores[t], t))
        return Ranking(ordered=tuple(ordered))

    def advance(self, observed: int) -> None:
        if not 0 <= observed < self.vocab_size:
            raise CorruptDataError(
                f"token id {observed} outside vocabulary of {self.vocab_size}"
            )
        self._pending.append(observed)
        self.step += 1
        if len(self._pending) >= self.descriptor.batch_width:
            for token in self._pending:
                self._commit(token)
            self._pending.clear()

    def _commit(self, token: int) -> None:
        context = tuple(self._context)
        for j in range(self.descriptor.order + 1):
            if j > len(context):
                break
            suffix = context[len(context) - j :]
            table = self._counts[j].setdefault(suffix, {})
            table[token] = table.get(token, 0) + 1
        self._context.append(token)

    def committed_context(self) -> tuple[int, ...]:
        return tuple(self._context)

    def close(self) -> None:
        """Nothing to release; exists so all sessions close uniformly."""


class ExternalPredictorClient:
    """Session against a predictor server speaking the line protocol."""

    def __init__(self, descriptor: PredictorDescriptor, vocab_size: int) -> None:
        if descriptor.kind != "external":
            raise UsageError("descriptor is not for an external predictor")
        self.descriptor = descriptor
        self.vocab_size = vocab_size
        self.fingerprint = b""
        self.server_id = ""
        self._context: deque[int] = deque(maxlen=descriptor.window)
        self._reader = None
        self._writer = None
        self._sock = None

    def connect(self, vocab_fingerprint: bytes) -> None:
        host, _, port = self.descriptor.address.rpartition(":")
        if not host or not port.isdigit():
            raise UsageError(f"external address must be host:port, got {self.descriptor.address!r}")
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=30)
        except OSError as exc:
            raise TransportError(f"cannot reach predictor at {self.descriptor.address}: {exc}") from exc
        self._reader = self._sock.makefile("rb")
        self._writer = self._sock.makefile("wb")
        self._send(f"HELLO {PROTOCOL_VERSION} {vocab_fingerprint.hex()}")
        reply = self._recv()
        parts = reply.split()
        if parts[:1] == ["ERR"]:
            raise FingerprintMismatchError(f"server refused session: {reply}")
        if len(parts) != 3 or parts[0] != "OK":
            raise TransportError(f"malformed handshake reply: {reply!r}")
        self.server_id = parts[1]
        try:
            self.fingerprint = bytes.fromhex(parts[2])
        except ValueError as exc:
            raise TransportError(f"malformed fingerprint in handshake: {reply!r}") from exc
        if len(self.fingerprint) != 32:
            raise TransportError("server fingerprint is not 32 bytes")

    def rank_next(self) -> TopRestRanking:
        context = list(self._context)
        self._send("RANK " + " ".join([str(len(context))] + [str(t) for t in context]))
        reply = self._recv()
        parts = reply.split()
        if parts[:1] == ["ERR"]:
            raise TransportError(f"server error: {reply}")
        if len(parts) < 4 or parts[0] != "TOPS" or parts[-2:] != ["REST", "LEX"]:
            raise TransportError(f"malformed ranking reply: {reply!r}")
        try:
            m = int(parts[1])
            tops = tuple(int(t) for t in parts[2:-2])
        except ValueError as exc:
            raise TransportError(f"malformed ranking reply: {reply!r}") from exc
        if len(tops) != m:
            raise TransportError(f"server announced {m} tops but sent {len(tops)}")
        return TopRestRanking(tops=tops, vocab_size=self.vocab_size)

    def advance(self, observed: int) -> None:
        if not 0 <= observed < self.vocab_size:
            raise CorruptDataError(
                f"token id {observed} outside vocabulary of {self.vocab_size}"
            )
        self._context.append(observed)

    def close(self) -> None:
        if self._writer is not None:
            try:
                self._send("BYE")
            except TransportError:
                pass
        for stream in (self._reader, self._writer, self._sock):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        self._reader = self._writer = self._sock = None

    def _send(self, line: str) -> None:
        if self._writer is None:
            raise TransportError("session is not connected")
        try:
            self._writer.write(line.encode("ascii") + b"\n")
            self._writer.flush()
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def _recv(self) -> str:
        try:
            raw = self._reader.readline()
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        if not raw:
            raise TransportError("server closed the connection")
        return raw.decode("ascii", errors="replace").strip()


def open_session(
    descriptor: PredictorDescriptor, vocab_size: int, vocab_fingerprint: bytes
) -> BuiltinPredictor | ExternalPredictorClient:
    if descriptor.kind == "builtin":
        return BuiltinPredictor(descriptor, vocab_size)
    client = ExternalPredictorClient(descriptor, vocab_size)
    client.connect(vocab_fingerprint)
    return client
