"""Exception types shared across the engine.

Every error carries a stable ``name`` (the class name) so the CLI and the
HTTP service can emit machine-parsable error identifiers without string
matching on messages.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class ZeroVector(EngineError):
    """Normalization of a (near-)zero vector was requested."""


class DimMismatch(EngineError):
    """Vectors of different dimensionality were combined."""


class EmptyCorpus(EngineError):
    """An operation requiring at least one image got none."""


class BackendError(EngineError):
    """An encoder backend failed; carries the backend diagnostic."""


class InsufficientClasses(EngineError):
    """Zero-shot classification needs at least two prompts."""


class DecodeError(EngineError):
    """Image bytes could not be decoded."""


class ManifestError(EngineError):
    """A manifest row is malformed. ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(EngineError):
    """Two corpus records share an id."""

    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id: {record_id!r}")
        self.record_id = record_id


class CorruptStore(EngineError):
    """A store file failed validation. ``offset`` is the byte position."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"at byte {offset}: {message}")
        self.offset = offset


class BadInterval(EngineError):
    """Lattice sampling interval is non-positive or exceeds the bbox."""


class ClientError(EngineError):
    """A street-imagery request failed after all retries."""


class QuotaExceeded(EngineError):
    """Street-imagery quota ran out; partial results are attached."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyRegion(EngineError):
    """No geo-tagged records fall inside the requested bounding box."""


class DegenerateScores(EngineError):
    """A score set has zero variance where variance is required."""


class UnknownCorpus(EngineError):
    """The service has no corpus registered under that name."""


class UnknownImage(EngineError):
    """The corpus has no record with that id."""
