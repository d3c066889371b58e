"""Exception hierarchy shared by every mixmoments module."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import RejectReason


class MomentError(ValueError):
    """Base class for all errors raised by the package."""


class DimensionError(MomentError):
    """Operands disagree in variable count or truncation order."""


class DomainError(MomentError):
    """An input value lies outside the domain of an operation."""


class PreconditionError(MomentError):
    """A documented precondition of an operation does not hold."""


class ConfigError(MomentError):
    """Configuration could not be read or has the wrong shape."""


class CandidateRejected(MomentError):
    """A root branch of the moment solver cannot produce a valid candidate."""

    def __init__(self, reason: "RejectReason", message: str = ""):
        self.reason = reason
        super().__init__(message or reason.value)
