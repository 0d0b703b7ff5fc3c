"""Exception types shared across the package."""


class HardySimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HardySimError, ValueError):
    """A parameter or registry is outside its documented domain."""


class CapacityError(HardySimError, ValueError):
    """An operation would exceed the configured photon cap."""


class ValidationError(HardySimError, ValueError):
    """An operation received structurally inconsistent inputs."""


class NetworkParseError(HardySimError, ValueError):
    """The circuit text failed to parse; carries the offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message}, line {line}")
        self.line = line


class StatisticsError(HardySimError, RuntimeError):
    """A statistical estimate was requested from insufficient data."""
