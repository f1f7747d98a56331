"""Exception hierarchy for the qclock package.

Everything derives from QClockError; most errors also subclass ValueError so
generic callers that catch ValueError keep working.
"""


class QClockError(Exception):
    """Base class for all qclock errors."""


class BoundsError(QClockError, ValueError):
    """An occupation number or node/qubit index is out of range."""


class ShapeError(QClockError, ValueError):
    """Mismatched capacities or vector lengths between two objects."""


class DegenerateStateError(QClockError, ValueError):
    """A state or probe with zero norm (or no terms) was requested."""


class ProtocolError(QClockError, ValueError):
    """Base class for protocol-run failures."""


class ProtocolPreconditionError(ProtocolError):
    """The initial probe does not satisfy the protocol's requirements."""


class SchedulingError(ProtocolError):
    """An event was scheduled before an earlier mandatory event."""


class CapacityError(QClockError, ValueError):
    """The dense oracle register would exceed the supported qubit count."""


class UnsupportedStateError(QClockError, ValueError):
    """A state outside the supported form was passed (wrong support/pattern)."""


class FamilyError(QClockError, ValueError):
    """A phase family evaluator returned an invalid (or discontinuous) state."""


class UnidentifiableError(QClockError, ValueError):
    """The parameter carries no information (zero QFI or zero phase scale)."""


class InsufficientDataError(QClockError, ValueError):
    """Not enough measurement data to form an estimate."""


class ConfigError(QClockError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


class OracleMismatchError(QClockError):
    """Cross-validation between independent engines failed (CLI exit code 3)."""
