"""Domain error hierarchy.

Every error carries a short machine-readable ``code`` (used by the HTTP
facade and the CLI) and a human-readable detail message.
"""

from __future__ import annotations


class PrepubError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail or self.code


class ValidationFailed(PrepubError):
    """Input failed a structural or value check."""

    code = "validation"


class MalformedHandle(ValidationFailed):
    code = "malformed-handle"


class InvalidSpan(ValidationFailed):
    code = "invalid-span"


class MalformedAnchor(ValidationFailed):
    code = "malformed-anchor"


class EmptyField(ValidationFailed):
    code = "empty-field"


class EmptyName(ValidationFailed):
    code = "empty-name"


class SelfLoop(ValidationFailed):
    code = "self-loop"


class UnknownRelation(ValidationFailed):
    code = "unknown-relation"


class EmptyAggregation(ValidationFailed):
    code = "empty-aggregation"


class InvalidVisibilityChange(ValidationFailed):
    """Public outputs never go back to private."""

    code = "invalid-visibility-change"


class NotFoundError(PrepubError):
    """A referenced entity does not exist."""

    code = "not-found"


class UnknownPerson(NotFoundError):
    code = "unknown-person"


class UnknownItem(NotFoundError):
    code = "unknown-item"


class UnknownOutput(NotFoundError):
    code = "unknown-output"


class UnknownThread(NotFoundError):
    code = "unknown-thread"


class UnknownNotification(NotFoundError):
    code = "unknown-notification"


class UnknownAggregation(NotFoundError):
    code = "unknown-aggregation"


class UnknownCreator(NotFoundError):
    code = "unknown-creator"


class DanglingRef(NotFoundError):
    code = "dangling-ref"


class ConflictError(PrepubError):
    """The request clashes with existing state."""

    code = "conflict"


class DuplicateClaim(ConflictError):
    code = "duplicate-claim"


class DuplicateThread(ConflictError):
    code = "duplicate-thread"


class AlreadySuperseded(ConflictError):
    """Only the newest version of an output can be revised."""

    code = "already-superseded"


class PermissionDenied(PrepubError):
    """Caller is not entitled to perform the action."""

    code = "forbidden"


class NotOwner(PermissionDenied):
    code = "not-owner"


class NotParty(PermissionDenied):
    code = "not-party"


class NotParticipant(PermissionDenied):
    code = "not-participant"


class NotEligible(PermissionDenied):
    code = "not-eligible"


class PrivateThread(PermissionDenied):
    code = "private-thread"


class UnreachableArchive(PrepubError):
    code = "unreachable-archive"


class StorageCorruption(PrepubError):
    code = "storage-corruption"
