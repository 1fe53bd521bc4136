"""Exception types raised across the package."""


class ScrambleVerifyError(Exception):
    """Base class for all package errors."""


class DomainError(ScrambleVerifyError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class InvariantViolation(ScrambleVerifyError, ValueError):
    """A structural invariant (unitarity, trace preservation, ...) failed."""


class CapabilityError(ScrambleVerifyError):
    """The request exceeds what the dense engine is willing to do."""


class NotCliffordError(ScrambleVerifyError):
    """Pauli propagation hit a gate that does not map Paulis to Paulis.

    Use dense conjugation (``total_unitary``) for such circuits instead.
    """


class IncompleteCellError(ScrambleVerifyError, ValueError):
    """A state average was requested over a cell missing input states."""

    def __init__(self, missing):
        self.missing = tuple(sorted(missing))
        super().__init__(f"incomplete cell, missing input states: {', '.join(self.missing)}")


class ConfigError(ScrambleVerifyError, ValueError):
    """Malformed or inconsistent experiment configuration."""
