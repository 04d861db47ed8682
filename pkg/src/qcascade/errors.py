"""Exception types shared across the toolkit.

Hierarchy
---------
``QCascadeError`` is the base of everything this package raises on purpose,
so callers can catch one type. Precondition violations additionally inherit
``ValueError`` via ``InvalidInput``.
"""

from __future__ import annotations

__all__ = [
    "QCascadeError",
    "InvalidInput",
    "PolicyError",
    "MisplacedClosedBook",
    "BadStagePassages",
    "NonIncreasingPassages",
    "DuplicateStageName",
    "ThresholdOnFinalStage",
    "MissingThreshold",
    "ThresholdOutOfRange",
    "GridTooLarge",
    "TargetUnreachable",
    "MissingStageRecord",
    "DuplicateRecord",
    "MalformedLine",
    "SchemaViolation",
    "BackendUnreachable",
    "MalformedBackendResponse",
]


class QCascadeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(QCascadeError, ValueError):
    """An argument violated a documented precondition."""


class PolicyError(InvalidInput):
    """A cascade policy violates a structural invariant."""


class MisplacedClosedBook(PolicyError):
    """The closed-book stage is missing from position 0 or appears later."""


class BadStagePassages(PolicyError):
    """A stage's passage count is impossible for its kind."""


class NonIncreasingPassages(PolicyError):
    """Open-book passage counts must grow strictly along the cascade."""


class DuplicateStageName(PolicyError):
    """Two stages share a name, so log records cannot be attributed."""


class ThresholdOnFinalStage(PolicyError):
    """The final stage answers unconditionally and must not carry a threshold."""


class MissingThreshold(PolicyError):
    """A non-final stage has no escalation threshold."""


class ThresholdOutOfRange(PolicyError):
    """An escalation threshold lies outside [0, 1]."""


class GridTooLarge(InvalidInput):
    """A threshold sweep would enumerate more candidate combinations than allowed."""


class TargetUnreachable(QCascadeError):
    """The requested accuracy exceeds every point on the curve."""

    def __init__(self, target: float, best: float):
        self.target = target
        self.best = best
        super().__init__(
            f"target accuracy {target} exceeds the curve maximum {best}"
        )


class MissingStageRecord(QCascadeError):
    """A question escalated to a stage that has no logged prediction for it."""

    def __init__(self, qid: str, stage: str):
        self.qid = qid
        self.stage = stage
        super().__init__(f"no record for question {qid!r} at stage {stage!r}")


class _LocatedError(QCascadeError):
    """Error tied to a position in an input file."""

    def __init__(self, message: str, path: str | None = None, lineno: int | None = None):
        self.path = path
        self.lineno = lineno
        if path is not None and lineno is not None:
            message = f"{path}:{lineno}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class DuplicateRecord(_LocatedError):
    """The same (qid, stage) pair appears more than once in the input logs."""

    def __init__(self, qid: str, stage: str, path: str | None = None, lineno: int | None = None):
        self.qid = qid
        self.stage = stage
        super().__init__(
            f"duplicate record for question {qid!r} at stage {stage!r}", path, lineno
        )


class MalformedLine(_LocatedError):
    """A line of an input file is not valid UTF-8 JSON of the expected shape."""

    def __init__(self, path: str, lineno: int, reason: str):
        super().__init__(reason, path, lineno)


class SchemaViolation(_LocatedError):
    """A parsed value is missing a required field or has the wrong type or range."""

    def __init__(
        self,
        field: str,
        reason: str,
        path: str | None = None,
        lineno: int | None = None,
    ):
        self.field = field
        super().__init__(f"field {field!r}: {reason}", path, lineno)


class BackendUnreachable(QCascadeError):
    """A live reader backend could not be reached at all."""


class MalformedBackendResponse(QCascadeError):
    """A live reader backend answered with something outside the wire contract."""
