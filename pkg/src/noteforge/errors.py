"""Exception types shared across the pipeline."""

from __future__ import annotations


class NoteforgeError(Exception):
    """Base class for all pipeline errors."""


class UnreadableSource(NoteforgeError):
    """The video source could not be opened or decoded."""


class EmptyVideo(NoteforgeError):
    """The source decodes but contains no frames."""


class NoAudioTrack(NoteforgeError):
    """No usable audio stream; the transcript will be empty."""


class ProviderFailure(NoteforgeError):
    """A model provider failed after the configured retries."""

    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


class SchemaViolation(NoteforgeError):
    """Provider output failed schema validation even after one repair re-ask."""


class DimensionMismatch(NoteforgeError):
    """Vector dimensions or image shapes do not agree."""


class ZeroVector(NoteforgeError):
    """Cosine similarity is undefined for a zero vector."""


class MismatchedSource(NoteforgeError):
    """Filtered sets were built over different frame sequences."""


class InvalidGraph(NoteforgeError):
    """Graph violates DAG invariants (cycles, self-loops, duplicates)."""


class CycleDetected(InvalidGraph):
    """Cycle remained after relation repair exhausted."""


class EmptyContent(NoteforgeError):
    """An operation requires non-empty chapter or step content."""


class DanglingReference(NoteforgeError):
    """Note scheme assembly found a broken internal reference."""


class MissingAsset(NoteforgeError):
    """A referenced asset does not exist in the job asset store."""


class SchemaVersionUnsupported(NoteforgeError):
    """Scheme document declares a schema_version this build cannot parse."""


class ValidationFailed(NoteforgeError):
    """Scheme document violates an invariant; carries the offending field path."""

    def __init__(self, field_path: str, message: str = ""):
        super().__init__(f"{field_path}: {message}" if message else field_path)
        self.field_path = field_path
