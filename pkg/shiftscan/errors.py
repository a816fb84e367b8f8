"""Exception hierarchy shared by the library and the CLI.

The CLI maps any ``ShiftscanError`` to exit code 1 (data error); argument
problems caught by argparse exit with 2.
"""

from __future__ import annotations


class ShiftscanError(Exception):
    """Base class for every error raised by shiftscan."""


class ParameterError(ShiftscanError, ValueError):
    """An argument is outside its admissible range."""


class ConfigurationInvalidError(ShiftscanError, ValueError):
    """Changepoint times are unsorted, duplicated or out of range."""


class DegenerateSeriesError(ShiftscanError, ValueError):
    """The series (or segment) has zero sample variance."""


class UnsupportedLevelError(ShiftscanError, ValueError):
    """No tabulated critical value exists for the requested level."""


class InvalidCountError(ShiftscanError, ValueError):
    """Count data contain negative or non-integer values."""


class InsufficientOverlapError(ShiftscanError, ValueError):
    """Target and reference share fewer than two time labels."""


class SearchTooLargeError(ShiftscanError):
    """Exhaustive enumeration was refused because 2^(N-1) is too large."""


class SettingsError(ShiftscanError):
    """The YAML settings file is unreadable or invalid."""


class SingularFitError(ShiftscanError):
    """The regression design is rank deficient."""

    def __init__(self, message: str, regime: int | None = None):
        super().__init__(message)
        self.regime = regime


class CsvParseError(ShiftscanError, ValueError):
    """A CSV input row could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
