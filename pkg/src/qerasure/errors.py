class ErasureError(Exception):
    """Base class for package errors."""


class GuardError(ErasureError):
    """A size guard rejected the request (too large to sample or sum exactly)."""


class InvalidStateError(ErasureError, ValueError):
    """Input is not a valid density matrix, basis or amplitude set."""


class OutcomeImpossibleError(ErasureError):
    """Measurement outcome has (numerically) zero probability."""


class UnsupportedCoefficientError(ErasureError, ValueError):
    """No asymptotic coefficient is known for this accessible dimension."""


class InternalError(ErasureError):
    """A numerical consistency check failed."""
