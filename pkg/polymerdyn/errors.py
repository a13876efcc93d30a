"""
Custom exceptions for polymerdyn.

Every exception carries a human-readable message and a ``details`` mapping
holding the reproducible witness (vertex sets, measured quantities, limits).
The command-line interface maps each class to its ``exit_code``.
"""

from typing import Any, Dict, Optional


class PolymerDynError(Exception):
    """Base exception for all polymerdyn errors."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize a new PolymerDynError.

        Args:
            message: Error message
            details: Additional error details (witnesses, limits)
        """
        self.message = message
        self.details = details or {}

        super().__init__(self.message)


class UsageError(PolymerDynError):
    """Command-line misuse."""

    exit_code = 1


class ValidationError(PolymerDynError):
    """Input failed validation."""

    exit_code = 2


class GraphValidationError(ValidationError):
    """Graph input is malformed."""


class SelfLoopError(GraphValidationError):
    """A simple graph was given a loop."""


class DuplicateEdgeError(GraphValidationError):
    """A simple graph was given the same edge twice."""


class VertexRangeError(GraphValidationError):
    """A vertex index lies outside [0, n)."""


class EmptyVertexSetError(GraphValidationError):
    """An operation that needs a non-empty vertex set got an empty one."""


class DisconnectedSetError(GraphValidationError):
    """A vertex set (or host) that must be connected is not."""


class DegreeSequenceError(ValidationError):
    """Degree sequence cannot be paired or parsed."""


class ParameterError(ValidationError):
    """A numeric parameter is outside its domain."""


class OutOfRegimeError(ValidationError):
    """Parameters lie outside the guaranteed regime and were not forced."""


class ResourceLimitError(PolymerDynError):
    """A work or size guard refused to continue."""

    exit_code = 3


class WorkCeilingExceeded(ResourceLimitError):
    """Subset enumeration exceeded its work ceiling."""


class OracleSizeError(ResourceLimitError):
    """A brute-force oracle refused an instance above its size guard."""


class RejectionSamplingFailed(ResourceLimitError):
    """No simple graph was produced within max_attempts."""


class SamplingConditionViolation(PolymerDynError):
    """The single-edge polymer distribution has mass above one."""

    exit_code = 4


class ConsistencyError(PolymerDynError):
    """An internal invariant that the theory guarantees was broken."""

    exit_code = 4
