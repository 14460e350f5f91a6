"""Exception types shared across the library."""


class AngleMergeError(Exception):
    """Base class for all library-specific errors."""


class ZeroRowError(AngleMergeError, ValueError):
    """A data row has (numerically) zero norm and cannot be normalized."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} has zero norm; cannot project onto the unit sphere")


class TooFewAnglesError(AngleMergeError, ValueError):
    """An angle set is too small to estimate a mean and variance from."""


class DegenerateInputError(AngleMergeError, ValueError):
    """Input violates a structural precondition (e.g. fewer than 3 points)."""


class NoFiniteSampleSizeError(AngleMergeError, ValueError):
    """No finite sample count satisfies the separation bound (psi <= 1)."""


class DomainError(AngleMergeError, ValueError):
    """Argument outside the mathematical domain of a special function."""
