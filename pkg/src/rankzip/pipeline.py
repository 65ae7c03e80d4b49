"""End-to-end composition: text to container bytes and back.

Raw mode feeds UTF-8 bytes straight to a coder. Rank mode first rewrites the
text as prediction ranks, serializes them, and then applies the coder; the
container records which predictor and vocabulary produced the ranks as
fingerprints, and decompression refuses to guess: the session it opens must
hash to the recorded fingerprints or it stops with a mismatch error rather
than emit plausible-looking wrong text.

Vocabulary resolution on decode tries, in order, an explicitly supplied
vocabulary, the bundled English one, and the raw byte alphabet, keeping
whichever matches the recorded fingerprint.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .coders import Coder, default_params, get_coder
from .container import (
    MODE_RANK,
    MODE_RAW,
    SERIALIZATION_VARINT,
    ContainerHeader,
    read_container,
    write_container,
)
from .errors import CorruptDataError, FingerprintMismatchError
from .predictor import (
    DEFAULT_WINDOW,
    PredictorDescriptor,
    builtin_descriptor,
    external_descriptor,
    open_session,
)
from .rank_codec import (
    decode_ranks,
    deserialize_ranks,
    encode_ranks,
    serialize_ranks,
    with_fingerprints,
)
from .tokenizer import Vocabulary, byte_vocabulary, parse_vocabulary

BUNDLED_VOCAB_RESOURCE = "english.azvb"


@dataclass(frozen=True)
class CompressionSettings:
    """What the compress side needs to know; everything else is derived."""

    predictor: PredictorDescriptor | None
    coder_name: str
    coder_params: tuple[int, ...] | None = None
    serialization: str = SERIALIZATION_VARINT


@lru_cache(maxsize=1)
def bundled_vocabulary() -> Vocabulary:
    payload = (
        resources.files("rankzip").joinpath("data", BUNDLED_VOCAB_RESOURCE).read_bytes()
    )
    return parse_vocabulary(payload)


def resolve_vocabulary(
    fingerprint: bytes, explicit: Vocabulary | None = None
) -> Vocabulary:
    candidates: list[Vocabulary] = []
    if explicit is not None:
        candidates.append(explicit)
    candidates.append(bundled_vocabulary())
    candidates.append(byte_vocabulary())
    for vocab in candidates:
        if vocab.fingerprint == fingerprint:
            return vocab
    if explicit is not None:
        raise FingerprintMismatchError(
            "supplied vocabulary does not match the container "
            f"(wanted {fingerprint.hex()[:16]}, got {explicit.fingerprint.hex()[:16]})"
        )
    raise FingerprintMismatchError(
        f"no known vocabulary matches fingerprint {fingerprint.hex()[:16]}; "
        "pass the vocabulary file that was used to compress"
    )


def _coder_for(settings: CompressionSettings) -> Coder:
    params = settings.coder_params
    if params is None:
        params = default_params(settings.coder_name)
    return get_coder(settings.coder_name, params)


def compress_text(
    text: str, settings: CompressionSettings, vocab: Vocabulary | None = None
) -> bytes:
    coder = _coder_for(settings)
    text_bytes = text.encode("utf-8")
    crc = zlib.crc32(text_bytes)
    if settings.predictor is None:
        header = ContainerHeader(
            mode=MODE_RAW,
            coder_name=coder.name,
            coder_params=coder.params,
            original_length=len(text_bytes),
            original_crc32=crc,
        )
        return write_container(header, coder.compress(text_bytes))
    descriptor = settings.predictor
    if vocab is None:
        vocab = bundled_vocabulary() if descriptor.kind == "builtin" else byte_vocabulary()
    session = open_session(descriptor, len(vocab), vocab.fingerprint)
    try:
        stream = encode_ranks(text_bytes, descriptor, vocab, session)
    finally:
        session.close()
    payload = coder.compress(serialize_ranks(stream, settings.serialization))
    header = ContainerHeader(
        mode=MODE_RANK,
        coder_name=coder.name,
        coder_params=coder.params,
        original_length=len(text_bytes),
        original_crc32=crc,
        serialization=settings.serialization,
        predictor_id=descriptor.id,
        predictor_fingerprint=stream.predictor_fingerprint,
        vocab_fingerprint=stream.vocab_fingerprint,
        token_count=stream.token_count,
    )
    return write_container(header, payload)


def _descriptor_from_id(
    predictor_id: str,
    window: int,
    batch_width: int,
    external_address: str | None,
) -> PredictorDescriptor:
    if predictor_id.startswith("external:"):
        address = external_address or predictor_id[len("external:") :]
        return external_descriptor(address, window=window)
    match = re.fullmatch(r"builtin-k(\d+)", predictor_id)
    if match is None:
        raise CorruptDataError(f"unrecognized predictor id {predictor_id!r}")
    return builtin_descriptor(
        order=int(match.group(1)),
        window=window,
        mode="batch" if batch_width > 1 else "individual",
        batch_width=batch_width,
    )


def decompress_bytes(
    data: bytes,
    vocab: Vocabulary | None = None,
    window: int = DEFAULT_WINDOW,
    batch_width: int = 1,
    external_address: str | None = None,
) -> str:
    header, payload = read_container(data)
    coder = get_coder(header.coder_name, header.coder_params)
    inner = coder.decompress(payload)
    if header.mode == MODE_RAW:
        text_bytes = inner
    else:
        stream = deserialize_ranks(inner, header.serialization)
        if stream.token_count != header.token_count:
            raise CorruptDataError(
                f"container promises {header.token_count} tokens "
                f"but payload holds {stream.token_count}"
            )
        stream = with_fingerprints(
            stream, header.predictor_fingerprint, header.vocab_fingerprint
        )
        descriptor = _descriptor_from_id(
            header.predictor_id, window, batch_width, external_address
        )
        resolved = resolve_vocabulary(header.vocab_fingerprint, vocab)
        session = open_session(descriptor, len(resolved), resolved.fingerprint)
        try:
            text_bytes = decode_ranks(stream, descriptor, resolved, session)
        finally:
            session.close()
    if len(text_bytes) != header.original_length:
        raise CorruptDataError(
            f"decoded {len(text_bytes)} bytes but container promises "
            f"{header.original_length}"
        )
    if zlib.crc32(text_bytes) != header.original_crc32:
        raise CorruptDataError("decoded text fails its checksum")
    try:
        return text_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptDataError("decoded bytes are not valid utf-8") from exc
