"""Shared exception types."""


class ThermosegError(Exception):
    """Base class for all workbench errors."""


class DomainError(ThermosegError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(ThermosegError, ValueError):
    """A scene / sampling / run configuration is invalid or unstable."""


class StoreError(ThermosegError, IOError):
    """Sequence store is missing, malformed, or in conflict."""
