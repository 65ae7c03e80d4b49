"""Wire protocol conformance: scripted exchanges over real sockets."""

from __future__ import annotations

import threading

from llm_bridge.server import PROTOCOL_VERSION


def hello_line(server) -> str:
    return f"HELLO {PROTOCOL_VERSION} {server.session.tokenizer_fingerprint.hex()}"


def greet(client, server) -> str:
    client.send(hello_line(server))
    return client.recv()


def test_handshake_accepts_matching_client(tiny_server, connect):
    client = connect(tiny_server)
    reply = greet(client, tiny_server)
    parts = reply.split()
    assert parts[0] == "OK"
    assert parts[1] == tiny_server.server_id
    assert " " not in tiny_server.server_id
    assert bytes.fromhex(parts[2]) == tiny_server.session.fingerprint
    assert len(parts) == 3


def test_handshake_rejects_wrong_protocol_version(tiny_server, connect):
    client = connect(tiny_server)
    client.send(f"HELLO 2 {tiny_server.session.tokenizer_fingerprint.hex()}")
    assert client.recv().startswith("ERR unsupported-protocol-version")


def test_handshake_rejects_foreign_vocabulary(tiny_server, connect):
    client = connect(tiny_server)
    client.send(f"HELLO {PROTOCOL_VERSION} {'00' * 32}")
    assert client.recv().startswith("ERR tokenizer-mismatch")


def test_handshake_rejects_malformed_hello(tiny_server, connect):
    client = connect(tiny_server)
    client.send("HELLO")
    assert client.recv().startswith("ERR malformed-query")
    client.send("HELLO 1")
    assert client.recv().startswith("ERR malformed-query")
    client.send("HELLO 1 abc extra")
    assert client.recv().startswith("ERR malformed-query")


def test_rank_before_hello_is_refused(tiny_server, connect):
    client = connect(tiny_server)
    client.send("RANK 0")
    assert client.recv().startswith("ERR handshake-required")


def test_second_hello_is_refused(tiny_server, connect):
    client = connect(tiny_server)
    assert greet(client, tiny_server).startswith("OK ")
    client.send(hello_line(tiny_server))
    assert client.recv().startswith("ERR duplicate-hello")


def test_rank_reply_matches_engine_ordering(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    client.send("RANK 2 5 9")
    parts = client.recv().split()
    expected = tiny_server.engine.tops((5, 9)).tolist()
    assert parts[0] == "TOPS"
    assert int(parts[1]) == len(expected)
    assert [int(p) for p in parts[2:-2]] == expected
    assert parts[-2:] == ["REST", "LEX"]


def test_empty_context_is_a_valid_query(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    client.send("RANK 0")
    reply = client.recv()
    assert reply.startswith("TOPS ")
    assert reply.endswith(" REST LEX")


def test_identical_queries_get_byte_identical_replies(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    client.send("RANK 3 7 7 7")
    first = client.recv_raw()
    client.send("RANK 3 7 7 7")
    second = client.recv_raw()
    assert first == second
    assert first.startswith(b"TOPS ")


def test_out_of_range_token_is_named(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    vocab_size = tiny_server.engine.vocab_size
    client.send(f"RANK 1 {vocab_size}")
    assert client.recv() == f"ERR bad-token {vocab_size}"
    client.send("RANK 2 4 -1")
    assert client.recv() == "ERR bad-token -1"


def test_oversized_context_is_refused(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    count = tiny_server.engine.window + 1
    client.send("RANK " + " ".join([str(count)] + ["1"] * count))
    assert client.recv().startswith("ERR context-too-long")


def test_malformed_rank_lines_get_err(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    for line in ("RANK", "RANK x", "RANK -1", "RANK 3 1 2", "RANK 1 abc", "RANK 1 1 2"):
        client.send(line)
        assert client.recv().startswith("ERR malformed-query"), line


def test_unknown_commands_and_junk_get_err_never_silence(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    client.send("FROB 1 2 3")
    assert client.recv().startswith("ERR unknown-command")
    client.send("")
    assert client.recv().startswith("ERR malformed-query")
    client.send_raw(b"\xff\xfe garbage \xba\n")
    assert client.recv().startswith("ERR")


def test_bye_closes_the_connection(tiny_server, connect):
    client = connect(tiny_server)
    greet(client, tiny_server)
    client.send("BYE")
    assert client.at_eof()


def test_transcript_replays_byte_identically(tiny_server, connect):
    script = (
        hello_line(tiny_server) + "\n"
        "RANK 0\n"
        "RANK 1 42\n"
        "RANK 2 42 999\n"
        "RANK 1 70000\n"
        "RANK 2 42 999\n"
        "BYE\n"
    ).encode("ascii")

    def run_session() -> bytes:
        client = connect(tiny_server)
        client.send_raw(script)
        received = bytearray()
        while True:
            chunk = client.reader.readline()
            if not chunk:
                break
            received += chunk
        return bytes(received)

    first = run_session()
    second = run_session()
    assert first == second
    assert first.count(b"\n") == 6  # one reply per line before BYE
    assert b"ERR bad-token 70000" in first


def test_toolkit_compresses_and_restores_through_the_server(tiny_server):
    from rankzip import CompressionSettings, bundled_vocabulary, compress_text, decompress_bytes
    from rankzip.predictor import external_descriptor

    host, port = tiny_server.server_address[:2]
    text = (
        "A short passage is enough to drive every part of the wire protocol: "
        "handshake, a ranking per token, and the goodbye."
    )
    settings = CompressionSettings(
        predictor=external_descriptor(f"{host}:{port}", window=tiny_server.engine.window),
        coder_name="deflate",
        coder_params=(9,),
    )
    blob = compress_text(text, settings, vocab=bundled_vocabulary())
    assert decompress_bytes(
        blob, vocab=bundled_vocabulary(), window=tiny_server.engine.window
    ) == text


def test_concurrent_sessions_are_isolated(tiny_server, connect):
    results = {}

    def session(name: str, context: str) -> None:
        client = connect(tiny_server)
        greet(client, tiny_server)
        for _ in range(3):
            client.send(f"RANK {context}")
            results.setdefault(name, []).append(client.recv())

    threads = [
        threading.Thread(target=session, args=("a", "1 5")),
        threading.Thread(target=session, args=("b", "2 6 7")),
    ]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(set(results["a"])) == 1
    assert len(set(results["b"])) == 1
    assert results["a"][0] != results["b"][0]
    assert results["a"][0].startswith("TOPS ")
