"""Exception hierarchy.

The CLI maps the three top-level families onto exit codes: ``ConfigError`` -> 2,
``DataError`` -> 3, ``InfeasiblePopulation`` -> 4.
"""

from __future__ import annotations


class V2GError(Exception):
    """Base class for all errors raised by the package."""


class ConfigError(V2GError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(V2GError, ValueError):
    """Malformed or inconsistent input data."""


class EmptyInput(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class MissingHours(DataError):
    def __init__(self, after, before):
        super().__init__(f"gap in hourly series between {after} and {before}")
        self.after = after
        self.before = before


class DuplicateTimestamp(DataError):
    def __init__(self, timestamp):
        super().__init__(f"duplicate timestamp {timestamp}")
        self.timestamp = timestamp


class NegativeWeight(DataError):
    def __init__(self, row: int):
        super().__init__(f"row {row}: negative weight")
        self.row = row


class EmptyDistribution(DataError):
    pass


class PriceSeriesTooShort(DataError):
    pass


class NonPositiveCost(DataError):
    pass


class TooFewPoints(DataError):
    pass


class InvalidWindow(ConfigError):
    pass


class DateOutOfRange(ConfigError):
    pass


class QOutOfRange(ConfigError):
    pass


class NegativeTimestep(ConfigError):
    pass


class InfeasibleCommute(ConfigError):
    pass


class InfeasiblePopulation(V2GError):
    """Rejection sampling exhausted its retry budget."""


class SocOutOfBounds(V2GError):
    """State of charge left [1 - DoD, 1]; indicates an engine bug."""
