"""Lossless text compression through prediction ranks.

A deterministic next-token predictor rewrites text as the rank each true
token held in the predictor's ordering; because well-predicted text yields
streams dominated by small ranks, a conventional byte coder then compresses
those streams further than it could the raw text. Everything needed to
invert the transform travels in a self-describing container.
"""

from .bench import BenchPipeline, BenchPlan, Report, emit_report, run_plan
from .container import ContainerHeader, read_container, write_container
from .errors import (
    CorruptDataError,
    FingerprintMismatchError,
    RankzipError,
    TransportError,
    UsageError,
)
from .metrics import (
    MetricsRecord,
    bits_per_character,
    compression_ratio,
    measure,
    shannon_entropy,
    timed,
)
from .pipeline import (
    CompressionSettings,
    bundled_vocabulary,
    compress_text,
    decompress_bytes,
)
from .predictor import (
    BuiltinPredictor,
    PredictorDescriptor,
    Ranking,
    TopRestRanking,
    builtin_descriptor,
    external_descriptor,
    open_session,
    token_at_rank,
    token_rank,
)
from .rank_codec import (
    RankStream,
    decode_ranks,
    deserialize_ranks,
    encode_ranks,
    serialize_ranks,
)
from .tokenizer import (
    TokenSequence,
    Vocabulary,
    byte_vocabulary,
    detokenize,
    load_vocabulary,
    parse_vocabulary,
    save_vocabulary,
    tokenize,
    train_bpe,
)

__version__ = "0.1.0"

__all__ = [
    "BenchPipeline",
    "BenchPlan",
    "BuiltinPredictor",
    "CompressionSettings",
    "ContainerHeader",
    "CorruptDataError",
    "FingerprintMismatchError",
    "MetricsRecord",
    "PredictorDescriptor",
    "Ranking",
    "RankStream",
    "RankzipError",
    "Report",
    "TokenSequence",
    "TopRestRanking",
    "TransportError",
    "UsageError",
    "Vocabulary",
    "bits_per_character",
    "builtin_descriptor",
    "bundled_vocabulary",
    "byte_vocabulary",
    "compress_text",
    "compression_ratio",
    "decode_ranks",
    "decompress_bytes",
    "deserialize_ranks",
    "detokenize",
    "emit_report",
    "encode_ranks",
    "external_descriptor",
    "load_vocabulary",
    "measure",
    "open_session",
    "parse_vocabulary",
    "read_container",
    "run_plan",
    "save_vocabulary",
    "serialize_ranks",
    "shannon_entropy",
    "timed",
    "token_at_rank",
    "token_rank",
    "tokenize",
    "train_bpe",
    "write_container",
    "__version__",
]
