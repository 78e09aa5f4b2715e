"""Exception types shared across the package."""


class KappaForgeError(Exception):
    """Base class for library errors."""


class UnsupportedGenerator(KappaForgeError):
    pass


class UnknownRelation(KappaForgeError):
    pass


class DegreeOverflow(KappaForgeError):
    pass


class WrongDegree(KappaForgeError):
    pass


class NumericError(KappaForgeError):
    """Grid-level failures: support or range violations."""


class SupportOverflow(NumericError):
    pass


class InterpolationOutOfRange(NumericError):
    pass


class OutOfRange(NumericError):
    pass


class ConfigError(KappaForgeError):
    pass


class NotIntegrable(KappaForgeError, TypeError):
    """Raised when a trace is requested of a non-grid (symbolic) operand."""
