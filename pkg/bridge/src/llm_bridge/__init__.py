"""Next-token ranking server backed by a small causal language model.

The package loads a frozen model fixture, serves ranking queries over a
line-based TCP protocol to the compression toolkit's external-predictor
client, and ships a command-line tool that can also rank a file offline for
cross-checking the two implementations against each other.
"""

from .model import (
    CausalScorer,
    LoadedModel,
    LstmModel,
    ModelFixtureError,
    TransformerModel,
    build_model,
    load_model,
    save_fixture,
    weights_revision,
)
from .ranking import RankingEngine
from .server import (
    DEFAULT_TOP_M,
    PROTOCOL_VERSION,
    BridgeServer,
    serve,
    start_server,
)
from .session import TIE_BREAK_RULE, BridgeSession, session_fingerprint
from .vocab import (
    BridgeVocabulary,
    VocabularyFormatError,
    bundled_vocabulary,
    detokenize,
    load_vocabulary,
    parse_vocabulary,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeServer",
    "BridgeSession",
    "BridgeVocabulary",
    "CausalScorer",
    "DEFAULT_TOP_M",
    "LoadedModel",
    "LstmModel",
    "ModelFixtureError",
    "PROTOCOL_VERSION",
    "RankingEngine",
    "TIE_BREAK_RULE",
    "TransformerModel",
    "VocabularyFormatError",
    "build_model",
    "bundled_vocabulary",
    "detokenize",
    "load_model",
    "load_vocabulary",
    "parse_vocabulary",
    "save_fixture",
    "serve",
    "session_fingerprint",
    "start_server",
    "tokenize",
    "weights_revision",
    "__version__",
]
