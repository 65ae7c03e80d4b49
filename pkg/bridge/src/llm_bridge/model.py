"""Small causal language models scored deterministically on CPU.

A model fixture is one self-contained file: architecture configuration,
weights, a revision string derived from both, and the fingerprint of the
vocabulary the model was trained against. Scoring prepends a reserved
begin-of-text token so the empty context is a trained input rather than a
degenerate one, runs in float32 on a single thread, and returns raw logits
for every real token.

Determinism holds for one build on one machine: identical context, identical
logits, for the life of a process and across processes using the same
interpreter, library versions, and CPU. Bit-identical replies on a different
machine are not promised, because float reduction order may differ there.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np
import torch
from torch import nn

FIXTURE_FORMAT_VERSION = 1


class ModelFixtureError(RuntimeError):
    """The model fixture is missing or malformed."""


class LstmModel(nn.Module):
    """Embedding-tied LSTM over token ids plus one begin-of-text id."""

    def __init__(self, vocab_size: int, embed_dim: int, layers: int, dropout: float):
        super().__init__()
        self.vocab_size = vocab_size
        self.embed = nn.Embedding(vocab_size + 1, embed_dim)
        self.drop = nn.Dropout(dropout)
        self.lstm = nn.LSTM(
            embed_dim,
            embed_dim,
            num_layers=layers,
            dropout=dropout if layers > 1 else 0.0,
            batch_first=True,
        )
        self.out_bias = nn.Parameter(torch.zeros(vocab_size))

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        x = self.drop(self.embed(ids))
        hidden, _ = self.lstm(x)
        hidden = self.drop(hidden)
        # Tied projection: only the real-token rows of the embedding score.
        return nn.functional.linear(
            hidden, self.embed.weight[: self.vocab_size], self.out_bias
        )


class TransformerModel(nn.Module):
    """Pre-norm causal transformer with tied input and output embeddings."""

    def __init__(
        self,
        vocab_size: int,
        embed_dim: int,
        heads: int,
        layers: int,
        dropout: float,
        max_positions: int,
    ):
        super().__init__()
        self.vocab_size = vocab_size
        self.max_positions = max_positions
        self.embed = nn.Embedding(vocab_size + 1, embed_dim)
        self.pos = nn.Embedding(max_positions, embed_dim)
        self.drop = nn.Dropout(dropout)
        layer = nn.TransformerEncoderLayer(
            d_model=embed_dim,
            nhead=heads,
            dim_feedforward=4 * embed_dim,
            dropout=dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.blocks = nn.TransformerEncoder(
            layer, num_layers=layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(embed_dim)
        self.out_bias = nn.Parameter(torch.zeros(vocab_size))

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        length = ids.shape[1]
        if length > self.max_positions:
            raise ValueError(
                f"sequence of {length} exceeds {self.max_positions} positions"
            )
        x = self.embed(ids) + self.pos.weight[:length]
        x = self.drop(x)
        mask = nn.Transformer.generate_square_subsequent_mask(length)
        x = self.blocks(x, mask=mask, is_causal=True)
        x = self.norm(x)
        return nn.functional.linear(
            x, self.embed.weight[: self.vocab_size], self.out_bias
        )


def build_model(config: dict) -> nn.Module:
    kind = config.get("kind")
    if kind == "lstm":
        return LstmModel(
            vocab_size=int(config["vocab_size"]),
            embed_dim=int(config["embed_dim"]),
            layers=int(config["layers"]),
            dropout=float(config["dropout"]),
        )
    if kind == "transformer":
        return TransformerModel(
            vocab_size=int(config["vocab_size"]),
            embed_dim=int(config["embed_dim"]),
            heads=int(config["heads"]),
            layers=int(config["layers"]),
            dropout=float(config["dropout"]),
            max_positions=int(config["window"]) + 1,
        )
    raise ModelFixtureError(f"unknown model kind {kind!r}")


def weights_revision(config: dict, state_dict: dict) -> str:
    """Short digest over configuration and every weight, stable across loads."""
    digest = hashlib.sha256()
    digest.update(json.dumps(config, sort_keys=True).encode("utf-8"))
    for name in sorted(state_dict):
        tensor = state_dict[name].detach().cpu().contiguous()
        digest.update(name.encode("utf-8"))
        digest.update(str(tuple(tensor.shape)).encode("ascii"))
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()[:12]


def save_fixture(path, config: dict, state_dict: dict) -> str:
    """Writes a fixture and returns the revision recorded inside it."""
    state = {name: tensor.detach().cpu() for name, tensor in state_dict.items()}
    revision = weights_revision(config, state)
    torch.save(
        {
            "format_version": FIXTURE_FORMAT_VERSION,
            "config": dict(config),
            "state_dict": state,
            "revision": revision,
        },
        path,
    )
    return revision


@dataclass(frozen=True)
class LoadedModel:
    model_id: str
    revision: str
    config: dict
    module: nn.Module


def load_model(model_id: str) -> LoadedModel:
    """Loads a fixture by bundled name, or by filesystem path when the id
    contains a path separator or a ``.pt`` suffix."""
    try:
        if model_id.endswith(".pt") or os.sep in model_id:
            with open(model_id, "rb") as handle:
                payload = torch.load(handle, map_location="cpu", weights_only=True)
        else:
            resource = resources.files("llm_bridge").joinpath(
                "fixtures", f"{model_id}.pt"
            )
            with resource.open("rb") as handle:
                payload = torch.load(handle, map_location="cpu", weights_only=True)
    except FileNotFoundError as exc:
        raise ModelFixtureError(f"no model fixture named {model_id!r}") from exc
    if (
        not isinstance(payload, dict)
        or payload.get("format_version") != FIXTURE_FORMAT_VERSION
        or not isinstance(payload.get("config"), dict)
    ):
        raise ModelFixtureError(f"model fixture {model_id!r} has an unknown layout")
    config = payload["config"]
    module = build_model(config)
    try:
        module.load_state_dict(payload["state_dict"])
    except (KeyError, RuntimeError) as exc:
        raise ModelFixtureError(
            f"model fixture {model_id!r} does not match its configuration: {exc}"
        ) from exc
    module.eval()
    for parameter in module.parameters():
        parameter.requires_grad_(False)
    return LoadedModel(
        model_id=model_id,
        revision=str(payload["revision"]),
        config=config,
        module=module,
    )


class CausalScorer:
    """Turns a loaded model into a deterministic context-to-logits function."""

    def __init__(self, loaded: LoadedModel):
        # A fixed thread count keeps float reduction order, and therefore
        # logits, reproducible from one process to the next.
        torch.set_num_threads(1)
        self.loaded = loaded
        self.vocab_size = int(loaded.config["vocab_size"])
        self.window = int(loaded.config["window"])
        self._begin = self.vocab_size

    def logits(self, context: Sequence[int]) -> np.ndarray:
        if len(context) > self.window:
            raise ValueError(
                f"context of {len(context)} tokens exceeds window {self.window}"
            )
        ids = torch.tensor([[self._begin, *context]], dtype=torch.long)
        with torch.no_grad():
            out = self.loaded.module(ids)
        return out[0, -1].to(torch.float32).numpy().copy()
