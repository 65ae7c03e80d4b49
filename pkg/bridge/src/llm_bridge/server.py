"""TCP server answering next-token ranking queries.

One connection is one session. A client introduces itself with a protocol
version and a vocabulary fingerprint, then asks for rankings of explicitly
spelled-out contexts; the model's weights are shared read-only across
connections. Replies are deterministic for the life of the process —
identical queries draw byte-identical answers — and every ill-formed line is
answered with an ERR reply rather than dropped.

The line grammar, one ASCII line per message:

    client: HELLO <version> <vocab-fingerprint-hex>
    server: OK <server-id> <session-fingerprint-hex>   (or ERR ...)
    client: RANK <n> <token-0> ... <token-n-1>
    server: TOPS <m> <id-0> ... <id-m-1> REST LEX      (or ERR ...)
    client: BYE                                        (server just closes)
"""

from __future__ import annotations

import socketserver

from .model import CausalScorer, ModelFixtureError, load_model
from .ranking import RankingEngine
from .session import BridgeSession
from .vocab import BridgeVocabulary, bundled_vocabulary

PROTOCOL_VERSION = 1
DEFAULT_TOP_M = 4096


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], engine: RankingEngine, session: BridgeSession):
        self.engine = engine
        self.session = session
        # The greeting is whitespace-delimited, so the advertised id must
        # never contain whitespace itself.
        self.server_id = "llm-bridge:" + "".join(session.model_id.split())
        super().__init__(address, SessionHandler)


class SessionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        greeted = False
        try:
            while True:
                raw = self.rfile.readline()
                if not raw:
                    break
                parts = raw.decode("ascii", errors="replace").split()
                if not parts:
                    self._send("ERR malformed-query empty line")
                    continue
                command = parts[0]
                if command == "BYE":
                    break
                if command == "HELLO":
                    reply = self._hello(parts, greeted)
                    greeted = greeted or reply.startswith("OK ")
                    self._send(reply)
                elif command == "RANK":
                    if greeted:
                        self._send(self._rank(parts))
                    else:
                        self._send("ERR handshake-required send HELLO first")
                else:
                    self._send(f"ERR unknown-command {command}")
        except (ConnectionError, BrokenPipeError):
            pass

    def _send(self, line: str) -> None:
        self.wfile.write((line + "\n").encode("ascii", errors="replace"))

    def _hello(self, parts: list[str], greeted: bool) -> str:
        session: BridgeSession = self.server.session
        if greeted:
            return "ERR duplicate-hello session already negotiated"
        if len(parts) != 3:
            return "ERR malformed-query HELLO takes a version and a fingerprint"
        if parts[1] != str(PROTOCOL_VERSION):
            return (
                f"ERR unsupported-protocol-version {parts[1]} "
                f"(this server speaks {PROTOCOL_VERSION})"
            )
        if parts[2].lower() != session.tokenizer_fingerprint.hex():
            return "ERR tokenizer-mismatch client vocabulary is not the served one"
        return f"OK {self.server.server_id} {session.fingerprint.hex()}"

    def _rank(self, parts: list[str]) -> str:
        engine: RankingEngine = self.server.engine
        if len(parts) < 2:
            return "ERR malformed-query RANK needs a token count"
        try:
            count = int(parts[1])
        except ValueError:
            return f"ERR malformed-query token count {parts[1]!r} is not an integer"
        if count < 0:
            return "ERR malformed-query negative token count"
        if len(parts) - 2 != count:
            return (
                f"ERR malformed-query promised {count} tokens, "
                f"carried {len(parts) - 2}"
            )
        try:
            tokens = [int(part) for part in parts[2:]]
        except ValueError:
            return "ERR malformed-query token ids must be integers"
        if count > engine.window:
            return (
                f"ERR context-too-long {count} tokens exceed "
                f"the window of {engine.window}"
            )
        for token in tokens:
            if not 0 <= token < engine.vocab_size:
                return f"ERR bad-token {token}"
        tops = engine.tops(tuple(tokens))
        return " ".join(
            ["TOPS", str(len(tops)), *[str(t) for t in tops.tolist()], "REST", "LEX"]
        )


def start_server(
    address: str | tuple[str, int],
    model_id: str,
    top_m: int = DEFAULT_TOP_M,
    vocab: BridgeVocabulary | None = None,
) -> BridgeServer:
    """Binds a server without running it; callers drive ``serve_forever``."""
    if isinstance(address, str):
        host, _, port_text = address.rpartition(":")
        if not host or not port_text.isdigit():
            raise ValueError(f"address must be host:port, got {address!r}")
        address = (host, int(port_text))
    if vocab is None:
        vocab = bundled_vocabulary()
    loaded = load_model(model_id)
    if loaded.config.get("vocab_fingerprint") != vocab.fingerprint.hex():
        raise ModelFixtureError(
            f"model {model_id!r} was trained against a different vocabulary"
        )
    engine = RankingEngine(CausalScorer(loaded), top_m=top_m)
    session = BridgeSession(
        model_id=model_id,
        revision=loaded.revision,
        tokenizer_fingerprint=vocab.fingerprint,
        top_m=engine.top_m,
        window=engine.window,
    )
    return BridgeServer(address, engine, session)


def serve(address: str | tuple[str, int], model_id: str, top_m: int = DEFAULT_TOP_M) -> None:
    """Serves rankings until interrupted."""
    with start_server(address, model_id, top_m) as server:
        host, port = server.server_address[:2]
        print(f"serving {model_id} on {host}:{port}", flush=True)
        server.serve_forever()
