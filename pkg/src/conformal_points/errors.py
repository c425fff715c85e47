"""Exception types shared across the package.

The hierarchy distinguishes configuration problems (bad input files or
expressions) from hypothesis violations (the mathematics is undefined for
the given data) so the CLI can map them to distinct exit codes.
"""


class ConformalPointsError(Exception):
    """Base class for all package errors."""


# --- expression handling -------------------------------------------------

class ExpressionError(ConformalPointsError):
    pass


class ExprSyntaxError(ExpressionError):
    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier '{name}' at offset {offset}")


class MissingBindingError(ExpressionError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no value bound for variable '{name}'")


class EvalDomainError(ExpressionError):
    pass


# --- hypothesis violations (exit code 2 in the CLI) ----------------------

class HypothesisViolation(ConformalPointsError):
    """A precondition of the verified identity fails for the given data."""


class NonVanishingViolation(HypothesisViolation):
    pass


class ZeroOnBoundary(HypothesisViolation):
    pass


class NonIsolatedZero(HypothesisViolation):
    pass


class ConformalBoundaryPoint(HypothesisViolation):
    pass


class EigenvalueCollision(HypothesisViolation):
    pass


class NotBoundaryPreserving(HypothesisViolation):
    pass


class OrientationError(HypothesisViolation):
    pass


class DataMismatch(HypothesisViolation):
    """Prescribed zero/winding data violates the count identity."""


class DegenerateUmbilicLocus(HypothesisViolation):
    pass


# --- numerical failures ---------------------------------------------------

class NumericalError(ConformalPointsError):
    pass


class RefinementLimit(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class DegenerateMetric(ConformalPointsError):
    pass


# --- configuration --------------------------------------------------------

class ConfigError(ConformalPointsError):
    pass


class UnsupportedSurface(ConfigError):
    pass
