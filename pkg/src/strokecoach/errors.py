"""Exception types raised by the engine.

Everything derives from EngineError so callers can catch domain failures
in one clause while letting programming errors propagate.
"""


class EngineError(Exception):
    """Base class for all engine-domain failures."""


class DegenerateQuaternion(EngineError):
    """Quaternion norm too small to normalize."""


class EmptySequence(EngineError):
    """An operation requiring at least one element got none."""


class DegeneratePose(EngineError):
    """Pose cannot be yaw-normalized (hip line vanishes in the ground plane)."""


class DegenerateBone(EngineError):
    """Bone length below resolution; direction undefined."""


class InvalidHeight(EngineError):
    """Body height outside the plausible (0.5, 2.5) m range."""


class JointSetMismatch(EngineError):
    """Two angle sequences disagree on their comparison-joint layout."""


class WindowUnderfilled(EngineError):
    """Fewer frames available than the comparison window requires."""


class EmptyStream(EngineError):
    """Input stream contained no records."""


class NonMonotonicTimestamps(EngineError):
    """Timestamps must increase strictly; carries the offending index."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"timestamp not increasing at index {index}")


class IndexOutOfRange(EngineError):
    """Frame index outside the recording's valid range."""


class InvertedRange(EngineError):
    """Trim range with start > end."""


class NotFound(EngineError):
    """Referenced entity does not exist."""


class StrokeNotFound(NotFound):
    pass


class SessionNotFound(NotFound):
    pass


class CorruptFile(EngineError):
    """Recording file failed schema or invariant validation."""


class InvalidSpeed(EngineError):
    """Playback speed not in the discrete supported set."""


class SchemaError(EngineError):
    """Wire record failed schema validation."""


class TopologyMismatch(EngineError):
    """Recordings built against different skeleton topologies."""
