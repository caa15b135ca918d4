"""Exception types shared across the package.

Each class carries the CLI exit code it maps onto, so the command layer
can translate failures without a lookup table.
"""


class TorusGrowthError(Exception):
    exit_code = 1


class ParseError(TorusGrowthError):
    exit_code = 1


class HypothesisFailure(TorusGrowthError):
    """Input matrix is outside the supported class."""

    exit_code = 2


class MarginTooSmall(HypothesisFailure):
    pass


class NotSquareFree(HypothesisFailure):
    pass


class PowerSearchExhausted(HypothesisFailure):
    pass


class DegenerateVector(TorusGrowthError):
    pass


class CoefficientOverflow(TorusGrowthError):
    pass


class NotImprovable(TorusGrowthError):
    pass


class OracleMismatch(TorusGrowthError):
    exit_code = 3


class ResourceLimit(TorusGrowthError):
    exit_code = 4

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class NumericalFailure(TorusGrowthError):
    exit_code = 2


class RelationResidual(NumericalFailure):
    pass


class ComponentVanishes(NumericalFailure):
    pass


class ThresholdNotMet(TorusGrowthError):
    """The analytic bracket is not yet positive; a reported condition."""
