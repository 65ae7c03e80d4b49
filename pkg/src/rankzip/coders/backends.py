"""Coders backed by system libraries: DEFLATE (gzip framing) and Brotli.

DEFLATE goes through zlib with a gzip wrapper. zlib leaves the gzip MTIME
field zero when no explicit header is supplied, so output depends only on the
input and the level, which the round-trip and benchmark tests rely on.

Brotli is bound with ctypes against the shared encoder/decoder libraries.
Encoding is one-shot into a buffer sized by the library's own worst-case
bound; decoding streams through a fixed window because the decompressed size
is not known up front. Both libraries are loaded lazily so importing this
module works on hosts without them.
"""

from __future__ import annotations

import ctypes
import zlib

from ..errors import CorruptDataError, UsageError

_GZIP_WBITS = 31

DEFAULT_DEFLATE_LEVEL = 9
DEFAULT_BROTLI_QUALITY = 11
DEFAULT_BROTLI_WINDOW = 24

_BROTLI_DECODER_ERROR = 0
_BROTLI_DECODER_SUCCESS = 1
_BROTLI_DECODER_NEEDS_MORE_INPUT = 2
_BROTLI_DECODER_NEEDS_MORE_OUTPUT = 3

_BROTLI_MODE_GENERIC = 0


def deflate_compress(data: bytes, level: int = DEFAULT_DEFLATE_LEVEL) -> bytes:
    if not 1 <= level <= 9:
        raise UsageError(f"deflate level must be 1..9, got {level}")
    deflater = zlib.compressobj(level, zlib.DEFLATED, _GZIP_WBITS)
    return deflater.compress(data) + deflater.flush()

def deflate_decompress(data: bytes) -> bytes:
    try:
        return zlib.decompress(data, wbits=_GZIP_WBITS)
    except zlib.error as exc:
        raise CorruptDataError(f"deflate payload rejected: {exc}") from exc


_brotli_encoder: ctypes.CDLL | None = None
_brotli_decoder: ctypes.CDLL | None = None


def _load_brotli_encoder() -> ctypes.CDLL:
    global _brotli_encoder
    if _brotli_encoder is None:
        try:
            lib = ctypes.CDLL("libbrotlienc.so.1")
        except OSError as exc:
            raise UsageError(
                "brotli encoder library (libbrotlienc.so.1) not available; "
                "available coders: huffman, adaptive-huffman, arithmetic, "
                "lz77, deflate"
            ) from exc
        lib.BrotliEncoderMaxCompressedSize.argtypes = [ctypes.c_size_t]
        lib.BrotliEncoderMaxCompressedSize.restype = ctypes.c_size_t
        lib.BrotliEncoderCompress.argtypes = [
            ctypes.c_int,
            ctypes.c_int,
            ctypes.c_int,
            ctypes.c_size_t,
            ctypes.c_char_p,
            ctypes.POINTER(ctypes.c_size_t),
            ctypes.c_char_p,
        ]
        lib.BrotliEncoderCompress.restype = ctypes.c_int
        _brotli_encoder = lib
    return _brotli_encoder


def _load_brotli_decoder() -> ctypes.CDLL:
    global _brotli_decoder
    if _brotli_decoder is None:
        try:
            lib = ctypes.CDLL("libbrotlidec.so.1")
        except OSError as exc:
            raise UsageError(
                "brotli decoder library (libbrotlidec.so.1) not available; "
                "available coders: huffman, adaptive-huffman, arithmetic, "
                "lz77, deflate"
            ) from exc
        lib.BrotliDecoderCreateInstance.argtypes = [
            ctypes.c_void_p,
            ctypes.c_void_p,
            ctypes.c_void_p,
        ]
        lib.BrotliDecoderCreateInstance.restype = ctypes.c_void_p
        lib.BrotliDecoderDestroyInstance.argtypes = [ctypes.c_void_p]
        lib.BrotliDecoderDestroyInstance.restype = None
        lib.BrotliDecoderDecompressStream.argtypes = [
            ctypes.c_void_p,
            ctypes.POINTER(ctypes.c_size_t),
            ctypes.POINTER(ctypes.POINTER(ctypes.c_uint8)),
            ctypes.POINTER(ctypes.c_size_t),
            ctypes.POINTER(ctypes.POINTER(ctypes.c_uint8)),
            ctypes.POINTER(ctypes.c_size_t),
        ]
        lib.BrotliDecoderDecompressStream.restype = ctypes.c_int
        _brotli_decoder = lib
    return _brotli_decoder


def brotli_compress(
    data: bytes,
    quality: int = DEFAULT_BROTLI_QUALITY,
    lgwin: int = DEFAULT_BROTLI_WINDOW,
) -> bytes:
    if not 0 <= quality <= 11:
        raise UsageError(f"brotli quality must be 0..11, got {quality}")
    if not 10 <= lgwin <= 24:
        raise UsageError(f"brotli window log must be 10..24, got {lgwin}")
    lib = _load_brotli_encoder()
    bound = lib.BrotliEncoderMaxCompressedSize(len(data))
    if bound == 0:
        bound = len(data) + 1024
    out = ctypes.create_string_buffer(bound)
    out_size = ctypes.c_size_t(bound)
    ok = lib.BrotliEncoderCompress(
        quality,
        lgwin,
        _BROTLI_MODE_GENERIC,
        len(data),
        data,
        ctypes.byref(out_size),
        out,
    )
    if not ok:
        raise UsageError("brotli encoder rejected the input")
    return out.raw[: out_size.value]


def brotli_decompress(data: bytes) -> bytes:
    lib = _load_brotli_decoder()
    state = lib.BrotliDecoderCreateInstance(None, None, None)
    if not state:
        raise UsageError("brotli decoder state allocation failed")
    try:
        chunk = 1 << 16
        in_buffer = (ctypes.c_uint8 * max(len(data), 1)).from_buffer_copy(
            data or b"\x00"
        )
        next_in = ctypes.cast(in_buffer, ctypes.POINTER(ctypes.c_uint8))
        avail_in = ctypes.c_size_t(len(data))
        out_parts: list[bytes] = []
        while True:
            out_buffer = (ctypes.c_uint8 * chunk)()
            next_out = ctypes.cast(out_buffer, ctypes.POINTER(ctypes.c_uint8))
            avail_out = ctypes.c_size_t(chunk)
            total_out = ctypes.c_size_t(0)
            result = lib.BrotliDecoderDecompressStream(
                state,
                ctypes.byref(avail_in),
                ctypes.byref(next_in),
                ctypes.byref(avail_out),
                ctypes.byref(next_out),
                ctypes.byref(total_out),
            )
            produced = chunk - avail_out.value
            if produced:
                out_parts.append(bytes(out_buffer[:produced]))
            if result == _BROTLI_DECODER_SUCCESS:
                if avail_in.value != 0:
                    raise CorruptDataError("brotli payload has trailing bytes")
                return b"".join(out_parts)
            if result == _BROTLI_DECODER_NEEDS_MORE_OUTPUT:
                continue
            if result == _BROTLI_DECODER_NEEDS_MORE_INPUT:
                raise CorruptDataError("brotli payload truncated")
            raise CorruptDataError("brotli payload rejected by decoder")
    finally:
        lib.BrotliDecoderDestroyInstance(state)
