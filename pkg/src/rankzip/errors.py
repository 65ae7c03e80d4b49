"""Error taxonomy shared across the toolkit.

Every failure mode surfaced to callers maps onto one of these classes so the
CLI can translate exceptions into stable exit codes without inspecting
messages.
"""

from __future__ import annotations


class RankzipError(Exception):
    """Base class for all toolkit errors."""


class UsageError(RankzipError):
    """Invalid arguments, flag combinations, or unreadable inputs."""


class TransportError(RankzipError):
    """External predictor unreachable or the session broke mid-stream."""


class FingerprintMismatchError(RankzipError):
    """Recorded predictor/vocabulary fingerprint does not match the one offered."""


class CorruptDataError(RankzipError):
    """Container, rank stream, or coder payload failed validation."""
