"""Exception types shared across the package."""


class QDivError(ValueError):
    """Base class for every error raised by qdiv."""


class OrderMismatchError(QDivError):
    """Two truncated series with different truncation orders were combined."""


class NotInvertibleError(QDivError, ArithmeticError):
    """Inversion of a series whose constant term vanishes."""


class DomainError(QDivError):
    """An argument lies outside the domain of the operation."""


class LengthError(QDivError):
    """A coefficient list or argument tuple has the wrong length."""


class ConfigError(QDivError):
    """Invalid simulation configuration."""
