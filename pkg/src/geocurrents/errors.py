"""Exception hierarchy shared by every module."""


class GeoCurrentsError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class NumericDegradationError(GeoCurrentsError):
    pass


class NotHyperbolicError(GeoCurrentsError):
    pass


class PreconditionError(GeoCurrentsError):
    pass


class AmbiguityError(GeoCurrentsError):
    """Two boundary points are too close to order reliably."""

    def __init__(self, message: str, points: tuple = ()):
        super().__init__(message)
        self.points = points


class DegeneratePairError(GeoCurrentsError):
    pass


class CommonPowerError(GeoCurrentsError):
    pass


class BoundExceededError(GeoCurrentsError):
    pass


class ResourceError(GeoCurrentsError):
    pass


class NoLimitError(GeoCurrentsError):
    def __init__(self, message: str, sequence: list | None = None):
        super().__init__(message)
        self.sequence = list(sequence or [])


class NonConvergenceError(GeoCurrentsError):
    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = list(partial or [])


class ConjugacyDiagnosticError(GeoCurrentsError):
    pass


class InvalidLaminationError(GeoCurrentsError):
    pass


class RHConditionError(GeoCurrentsError):
    """A candidate lift system violates one of the right-handed conditions."""

    def __init__(self, message: str, condition: str):
        super().__init__(message)
        self.condition = condition


class SearchExhaustedError(GeoCurrentsError):
    pass


class AxiomViolationError(GeoCurrentsError):
    pass


class ParseError(GeoCurrentsError):
    pass
