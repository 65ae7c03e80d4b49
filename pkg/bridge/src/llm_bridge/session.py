"""Session identity for the ranking server.

A session is pinned to the exact configuration that determines every reply:
which model, which build of its weights, how many explicit ranks a reply
carries, how much context a query may hold, and how logit ties break. The
digest over those facts travels in the handshake, so an encoder and a decoder
that would disagree on any reply refuse to pair up instead of mis-ranking
silently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

# Replies order token ids by logit, highest first, and break exact logit ties
# in favour of the lower token id. The rule's name is part of the session
# fingerprint so a build that changed the ordering could never impersonate
# one that did not.
TIE_BREAK_RULE = "logit-desc,id-asc"


def session_fingerprint(
    model_id: str, revision: str, top_m: int, window: int
) -> bytes:
    """Stable digest of the facts that determine every reply of a session.

    Components are length-prefixed before hashing so distinct configurations
    cannot collide through concatenation. The digest depends only on these
    values, never on process state, so the same build serves the same
    fingerprint across runs.
    """
    digest = hashlib.sha256()
    for part in (model_id, revision, str(top_m), str(window), TIE_BREAK_RULE):
        raw = part.encode("utf-8")
        digest.update(len(raw).to_bytes(4, "little"))
        digest.update(raw)
    return digest.digest()


@dataclass(frozen=True)
class BridgeSession:
    """Configuration a single client connection is served under.

    ``window`` counts context TOKENS per query, not characters; a client
    windowing by characters would see roughly four times as many bytes per
    token. ``frozen_context`` marks sessions whose client ranks several
    upcoming positions against one unchanging context; the wire protocol
    needs no special casing for that because every query carries its context
    explicitly, so the flag is descriptive only.
    """

    model_id: str
    revision: str
    tokenizer_fingerprint: bytes
    top_m: int
    window: int
    frozen_context: bool = False

    @property
    def fingerprint(self) -> bytes:
        return session_fingerprint(
            self.model_id, self.revision, self.top_m, self.window
        )
