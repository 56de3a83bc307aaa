"""Exception hierarchy shared by the library and the command-line front end."""


class FmcwSarError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(FmcwSarError, ValueError):
    """A numeric parameter is outside its legal domain."""


class AliasingError(InvalidParameterError):
    """Requested sample rate cannot represent the signal bandwidth."""


class InvalidDelayError(InvalidParameterError):
    """Echo delay is negative or beyond the chirp duration."""


class UndefinedSnrError(InvalidParameterError):
    """SNR was requested relative to a signal with zero power."""


class ConfigError(FmcwSarError, ValueError):
    """Inconsistent configuration (ADC rates, geometry, grid, metrics)."""


class AlignmentError(FmcwSarError, ValueError):
    """Signal clock (rate, start time or length) does not match the receiver."""


class ScenarioParseError(ConfigError):
    """Scenario file is empty or not well-formed."""


class ScenarioValidationError(ConfigError):
    """Scenario parsed but a field violates its invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
