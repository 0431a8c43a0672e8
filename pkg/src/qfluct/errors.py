"""Exception hierarchy used across the package."""


class QfluctError(Exception):
    """Base class for all library errors."""


class ValidationError(QfluctError, ValueError):
    """An input fails one of its documented contracts (shape, Hermiticity,
    positivity, completeness, ...).  The message carries the measured
    violation so callers can report it."""


class IllPosedProtocolError(ValidationError):
    """A final observable branch with value +infinity receives probability
    above the floor, i.e. the protocol's reachable states leak into the
    suppressed subspace."""


class ConsistencyError(QfluctError):
    """An internal cross-check between two independent computation routes
    failed beyond tolerance.  This flags a numerical or construction bug,
    not bad user input."""
