"""Exception hierarchy.

The CLI maps these onto exit codes: configuration problems exit 2,
data/shape problems exit 3, physics violations (energy bookkeeping,
degenerate geometry) exit 4.
"""


class LeakwaveError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LeakwaveError, ValueError):
    """A scalar argument is outside the mathematical domain of an operation."""


class ConfigurationError(LeakwaveError):
    """Invalid configuration: bad schema, aliasing, unresolvable pulse width,
    wrap-around guard violations and similar setup mistakes."""


class DataError(LeakwaveError):
    """Invalid or inconsistent input data."""


class ShapeError(DataError):
    """Mismatched lengths, sample rates or frequency-grid shapes."""


class GridMismatchError(DataError):
    """Two spectra do not share the same frequency grid."""


class GatingError(DataError):
    """A time gate is empty, outside the trace, or captures no energy."""


class DecompositionError(DataError):
    """The two-microphone wave decomposition cannot be evaluated."""


class InterpolationError(DataError):
    """Interpolation requested outside the grid or across invalid bins."""


class PhysicsError(LeakwaveError):
    """A physical consistency requirement is violated."""


class EnergyViolationError(PhysicsError):
    """Reflected plus transmitted power exceeds incident power beyond tolerance."""


class DegenerateGeometryError(PhysicsError):
    """The coupling system is singular or numerically unusable."""
