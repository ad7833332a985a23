"""Exception hierarchy shared by all modules."""


class GeoPhaseError(Exception):
    """Base class for every error raised by this package."""

    #: machine-readable reason code used in reports and CLI output
    reason = "GeoPhaseError"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.reason = cls.__name__


class InvalidState(GeoPhaseError, ValueError):
    """A state that cannot be used, typically one with zero norm."""


class InvalidConfig(GeoPhaseError, ValueError):
    """Interferometer parameters outside their physical range."""


class UndefinedPhase(GeoPhaseError, ArithmeticError):
    """The overlap vanishes, so no relative phase exists."""


class AmbiguousGeodesic(GeoPhaseError, ArithmeticError):
    """Antipodal endpoints: the shortest great-circle arc is not unique."""


class OpenPath(GeoPhaseError, ValueError):
    """A Bloch path whose segments do not form a closed loop."""


class Undersampled(GeoPhaseError, ValueError):
    """Adjacent path samples are too far apart for the quadrature."""


class FitFailure(GeoPhaseError, ArithmeticError):
    """The least-squares design matrix is rank deficient."""


class InternalError(GeoPhaseError, RuntimeError):
    """A non-finite value reached an output writer."""
