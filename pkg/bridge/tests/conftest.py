"""Shared fixtures: a throwaway model for protocol tests, live servers, and
a minimal line-protocol client for scripted exchanges."""

from __future__ import annotations

import socket
import threading
from pathlib import Path

import pytest
import torch

from llm_bridge.model import build_model, save_fixture
from llm_bridge.server import start_server
from llm_bridge.vocab import bundled_vocabulary

REPO_ROOT = Path(__file__).resolve().parents[2]
BUNDLED_MODEL = "prose-small"


@pytest.fixture(scope="session")
def vocab():
    return bundled_vocabulary()


@pytest.fixture(scope="session")
def tiny_fixture_path(tmp_path_factory, vocab) -> str:
    """A structurally valid model with untrained weights; fast to query."""
    torch.manual_seed(7)
    config = {
        "kind": "lstm",
        "vocab_size": len(vocab),
        "window": 16,
        "embed_dim": 32,
        "layers": 1,
        "dropout": 0.0,
        "vocab_fingerprint": vocab.fingerprint.hex(),
    }
    model = build_model(config)
    path = tmp_path_factory.mktemp("fixtures") / "tiny.pt"
    save_fixture(path, config, model.state_dict())
    return str(path)


def _run_server(server):
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread


@pytest.fixture(scope="module")
def tiny_server(tiny_fixture_path):
    server = start_server(("127.0.0.1", 0), tiny_fixture_path, top_m=8)
    _run_server(server)
    yield server
    server.shutdown()
    server.server_close()


@pytest.fixture(scope="module")
def real_server():
    """The bundled, trained model behind a live server."""
    server = start_server(("127.0.0.1", 0), BUNDLED_MODEL)
    _run_server(server)
    yield server
    server.shutdown()
    server.server_close()


class LineClient:
    """Speaks one ASCII line at a time; raw byte access for replay tests."""

    def __init__(self, port: int):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=30)
        self.reader = self.sock.makefile("rb")

    def send(self, text: str) -> None:
        self.sock.sendall(text.encode("ascii") + b"\n")

    def send_raw(self, raw: bytes) -> None:
        self.sock.sendall(raw)

    def recv(self) -> str:
        return self.reader.readline().decode("ascii").strip()

    def recv_raw(self) -> bytes:
        return self.reader.readline()

    def at_eof(self) -> bool:
        return self.reader.readline() == b""

    def close(self) -> None:
        try:
            self.reader.close()
            self.sock.close()
        except OSError:
            pass


@pytest.fixture()
def connect():
    clients = []

    def _connect(server) -> LineClient:
        client = LineClient(server.server_address[1])
        clients.append(client)
        return client

    yield _connect
    for client in clients:
        client.close()
