from typing import Optional


class DDCorError(Exception):
    """Base class for all ddcor errors."""

    exit_code = 1


class ConfigurationError(DDCorError, ValueError):
    exit_code = 2


class DataParseError(ConfigurationError):
    """A dataset cell could not be read as a finite real."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.line = line
        self.column = column


class InvalidDataError(DDCorError, ValueError):
    exit_code = 2


class InvalidParameterError(DDCorError, ValueError):
    exit_code = 2


class InsufficientSampleError(DDCorError, ValueError):
    exit_code = 3


class DegenerateError(DDCorError, ArithmeticError):
    exit_code = 3


class DegenerateResponseError(DegenerateError):
    """All conditioning values are equal."""


class DegenerateSampleError(DegenerateError):
    """All rows of the vector argument are equal."""


class DegenerateVarianceError(DegenerateError):
    """The plug-in asymptotic variance is zero."""
