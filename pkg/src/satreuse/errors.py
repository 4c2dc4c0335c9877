"""Exception types shared across the simulator."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulationError):
    """One or more configuration fields are invalid.

    ``errors`` is a list of (field, reason) pairs, one per violation.
    """

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        detail = "; ".join(f"{field}: {reason}" for field, reason in errors)
        super().__init__(f"invalid configuration: {detail}")


class DegenerateInputError(SimulationError):
    """Input image is all-zero and cannot be unit-normalized."""


class DimensionMismatchError(SimulationError):
    """Two vectors or images do not share the same shape."""


class DuplicateIdError(SimulationError):
    """Record id is already present in the index."""


class UnknownIdError(SimulationError):
    """Record id is not present."""


class OversizedRecordError(SimulationError):
    """A single record is larger than the whole cache capacity."""


class SamePositionError(SimulationError):
    """Link endpoints coincide; distance is undefined."""


class NonPositiveDistanceError(SimulationError):
    """Path loss requires a strictly positive distance."""


class EmptyAreaError(SimulationError):
    """Broadcast area contains no receiver."""


class AlreadyExpandedError(SimulationError):
    """Collaboration area was already expanded once."""


class EmptyAfterExclusionError(SimulationError):
    """No election candidate remains once the requester is excluded."""


class TaskFailedError(SimulationError):
    """The stand-in processor failed on a task."""


class InvalidSpecError(SimulationError):
    """Workload specification is unusable."""


class UnreadableFileError(SimulationError):
    """A workload input file could not be parsed."""

    def __init__(self, path: str, reason: str = ""):
        self.path = path
        msg = f"unreadable file: {path}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class EmptyDirectoryError(SimulationError):
    """Workload directory holds no usable images."""
