"""Exception types raised by the index and the benchmark harness."""


class HnswError(Exception):
    """Base class for all package errors."""


class ParameterError(HnswError, ValueError):
    """A configuration knob violates its contract (e.g. M < 2, ef < k)."""


class InputError(HnswError, ValueError):
    """A call argument is malformed (wrong dimension, empty entry set, ...)."""


class DimensionMismatch(InputError):
    """Vectors of unequal dimension were combined."""


class DuplicateLabel(HnswError, ValueError):
    """The label is already live in the index."""


class UnknownLabel(HnswError, KeyError):
    """The label is not present in the index."""


class AlreadyDeleted(HnswError):
    """The label is already flagged as deleted."""


class CapacityError(HnswError):
    """The index is full and no slot can be allocated."""


class EmptyIndexError(HnswError):
    """The operation requires a non-empty index."""


class InvalidState(HnswError):
    """The operation was called in a state that violates its precondition."""


class FormatError(HnswError, ValueError):
    """A binary file does not conform to its declared layout.

    Attributes:
        offset: Byte offset of the first malformed record, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(HnswError, ValueError):
    """A scenario configuration violates its invariants."""
