"""Exception hierarchy shared by every module."""


class YPeriodError(Exception):
    """Base class for all package errors."""


class ZeroDenominator(YPeriodError, ZeroDivisionError):
    pass


class DivisionByZero(YPeriodError, ZeroDivisionError):
    pass


class ShapeUnsupported(YPeriodError, ValueError):
    pass


class MissingNeighbor(YPeriodError, LookupError):
    pass


class DegenerateValue(YPeriodError, ArithmeticError):
    pass


class DegenerateFactor(YPeriodError, ArithmeticError):
    pass


class DegenerateSolve(YPeriodError, ArithmeticError):
    pass


class InconsistentSquare(YPeriodError, ArithmeticError):
    """Known data of a square violate a relation that has no unknown left."""


class SeedExhausted(YPeriodError):
    pass


class NotRegular(YPeriodError, ValueError):
    pass


class InsufficientWindow(YPeriodError, LookupError):
    pass


class NotApplicable(YPeriodError, ValueError):
    pass


class IoFailure(YPeriodError, OSError):
    pass


class ConfigError(YPeriodError, ValueError):
    pass
