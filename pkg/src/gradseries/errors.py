"""Exception hierarchy shared by all gradseries modules."""


class GradSeriesError(Exception):
    """Base class for all errors raised by gradseries."""


class UsageError(GradSeriesError, ValueError):
    """A caller violated a documented precondition."""


class DimensionMismatchError(UsageError):
    """Vector or multi-index lengths are inconsistent."""


class ParseError(UsageError):
    """Invalid expression source.

    Carries the 0-based character ``offset`` of the error plus the derived
    1-based ``line`` and ``column`` for display.
    """

    def __init__(self, message: str, source: str, offset: int):
        self.offset = offset
        prefix = source[:offset]
        self.line = prefix.count("\n") + 1
        self.column = offset - (prefix.rfind("\n") + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column}, offset {offset})")


class NumericError(GradSeriesError, ArithmeticError):
    """A computation produced a non-finite intermediate or result."""


class EnumerationCapError(GradSeriesError):
    """A multi-index enumeration would exceed the configured cap."""


class ConfigError(UsageError):
    """Invalid experiment configuration document."""
