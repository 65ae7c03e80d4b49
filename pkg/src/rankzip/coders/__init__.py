"""Registry of the interchangeable byte-stream coders.

Every coder maps bytes to bytes and back; the pipeline treats them uniformly.
A coder is addressed by name plus a tuple of integer parameters (empty for
the parameterless ones), and the registry index of each name doubles as its
numeric id inside containers, so the ordering below is part of the on-disk
format and must never be rearranged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..errors import UsageError
from . import adaptive_huffman, arithmetic, backends, huffman, lz77

CODER_NAMES: tuple[str, ...] = (
    "huffman",
    "adaptive-huffman",
    "arithmetic",
    "lz77",
    "deflate",
    "brotli",
)


@dataclass(frozen=True)
class Coder:
    """A configured compressor/decompressor pair."""

    name: str
    params: tuple[int, ...]
    compress: Callable[[bytes], bytes] = field(repr=False)
    decompress: Callable[[bytes], bytes] = field(repr=False)

    @property
    def coder_id(self) -> int:
        return CODER_NAMES.index(self.name)


_DEFAULT_PARAMS: dict[str, tuple[int, ...]] = {
    "huffman": (),
    "adaptive-huffman": (),
    "arithmetic": (),
    "lz77": (),
    "deflate": (backends.DEFAULT_DEFLATE_LEVEL,),
    "brotli": (backends.DEFAULT_BROTLI_QUALITY, backends.DEFAULT_BROTLI_WINDOW),
}


def default_params(name: str) -> tuple[int, ...]:
    if name not in _DEFAULT_PARAMS:
        raise UsageError(
            f"unknown coder {name!r}; expected one of {', '.join(CODER_NAMES)}"
        )
    return _DEFAULT_PARAMS[name]


def get_coder(name: str, params: tuple[int, ...] | None = None) -> Coder:
    """Resolve a coder by name, binding explicit or default parameters."""
    defaults = default_params(name)
    chosen = defaults if params is None else tuple(params)
    if len(chosen) != len(defaults):
        raise UsageError(
            f"coder {name!r} takes {len(defaults)} parameter(s), got {len(chosen)}"
        )
    if name == "huffman":
        return Coder(name, (), huffman.compress, huffman.decompress)
    if name == "adaptive-huffman":
        return Coder(name, (), adaptive_huffman.compress, adaptive_huffman.decompress)
    if name == "arithmetic":
        return Coder(name, (), arithmetic.compress, arithmetic.decompress)
    if name == "lz77":
        return Coder(name, (), lz77.compress, lz77.decompress)
    if name == "deflate":
        (level,) = chosen
        return Coder(
            name,
            chosen,
            lambda data: backends.deflate_compress(data, level),
            backends.deflate_decompress,
        )
    if name == "brotli":
        quality, lgwin = chosen
        return Coder(
            name,
            chosen,
            lambda data: backends.brotli_compress(data, quality, lgwin),
            backends.brotli_decompress,
        )
    raise UsageError(
        f"unknown coder {name!r}; expected one of {', '.join(CODER_NAMES)}"
    )


def coder_from_id(coder_id: int, params: tuple[int, ...]) -> Coder:
    if not 0 <= coder_id < len(CODER_NAMES):
        raise UsageError(f"unknown coder id {coder_id}")
    return get_coder(CODER_NAMES[coder_id], params)
