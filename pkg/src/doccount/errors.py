"""Exception types raised across the package."""


class DoccountError(Exception):
    """Base class for all package-specific errors."""


class EmptyInput(DoccountError):
    """Raised when a collection would contain no documents."""


class EmptyDocument(DoccountError):
    """Raised in strict mode when a document body is empty."""


class SeparatorInsideDocument(DoccountError):
    """Raised when a document body contains the reserved sentinel byte."""


class BudgetExceeded(DoccountError):
    """Raised when a synthetic collection would exceed the memory budget."""


class LengthExceedsDocument(DoccountError):
    """Raised when no document is long enough to sample a pattern from."""


class RangeInvalid(DoccountError):
    """Raised when a query range is malformed or out of bounds."""


class SelectOutOfRange(DoccountError):
    """Raised when select is asked for more bits than the vector holds."""


class IncompatiblePlacement(DoccountError):
    """Raised when a filtered variant is built from a per-pair H array."""


class PreconditionViolated(DoccountError):
    """Raised when a counting query is issued for a non-locus range."""


class CoverMismatch(DoccountError):
    """Raised when a locus straddles block boundaries without aligning to them."""


class VerificationFailed(DoccountError):
    """Raised when a benchmarked structure disagrees with the oracle."""

    def __init__(self, structure: str, pattern: bytes, got: int, expected: int):
        self.structure = structure
        self.pattern = pattern
        self.got = got
        self.expected = expected
        super().__init__(
            f"{structure} returned {got} for pattern {pattern!r}, oracle says {expected}"
        )


class FormatError(DoccountError):
    """Raised when a serialized index or bitvector is malformed."""
