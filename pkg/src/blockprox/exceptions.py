"""Exception types raised by blockprox."""


class DimensionError(ValueError):
    """Block or vector dimensions do not match what the problem expects."""


class PlanViolation(RuntimeError):
    """An activation plan produced an empty or out-of-range block set."""


class NumericalError(FloatingPointError):
    """A non-finite value appeared inside an iteration."""


class OracleFailure(RuntimeError):
    """The brute-force prox oracle did not settle within its iteration cap."""


class ReferenceFailure(RuntimeError):
    """A reference solution could not be computed to the requested accuracy."""


class UndefinedMetric(ValueError):
    """A metric is undefined for the supplied arguments."""
