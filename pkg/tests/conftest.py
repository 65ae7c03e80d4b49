"""Shared fixtures: corpus texts, the bundled vocabulary, input generators."""

from __future__ import annotations

import math
import pathlib
import random

import pytest

from rankzip.pipeline import bundled_vocabulary
from rankzip.tokenizer import Vocabulary, train_bpe

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "corpus"


@pytest.fixture(scope="session")
def vocab() -> Vocabulary:
    return bundled_vocabulary()


@pytest.fixture(scope="session")
def corpus_paths() -> list[pathlib.Path]:
    paths = sorted(CORPUS_DIR.glob("*.txt"))
    assert paths, "corpus directory is empty"
    return paths


@pytest.fixture(scope="session")
def corpus_texts(corpus_paths) -> list[str]:
    return [path.read_text(encoding="utf-8") for path in corpus_paths]


@pytest.fixture(scope="session")
def corpus_concat(corpus_texts) -> str:
    return "\n\n".join(corpus_texts)


@pytest.fixture(scope="session")
def tiny_vocab() -> Vocabulary:
    """A small trained vocabulary for tests that need one unlike the bundled."""
    return train_bpe(b"the cat sat on the mat and the cat ate " * 40, 280)


def random_unicode_char(rng: random.Random) -> str:
    """ASCII-weighted mix that still exercises 2-4 byte UTF-8 sequences."""
    roll = rng.random()
    if roll < 0.60:
        return chr(rng.randrange(0x20, 0x7F))
    if roll < 0.90:
        return chr(rng.randrange(0x20, 0x2FFF))
    return chr(rng.randrange(0x10000, 0x10800))


def random_unicode_string(rng: random.Random, length: int) -> str:
    return "".join(random_unicode_char(rng) for _ in range(length))


def log_uniform_lengths(rng: random.Random, count: int, top: int) -> list[int]:
    """count lengths spread log-uniformly over [0, top], endpoints forced."""
    lengths = [0, top]
    span = math.log(top + 1)
    while len(lengths) < count:
        lengths.append(int(math.exp(rng.random() * span)) - 1)
    return lengths
