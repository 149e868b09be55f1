"""Exception hierarchy shared across the package.

The CLI maps each class to a distinct exit code, so library code should
raise the most specific one that applies.
"""


class KickresError(Exception):
    """Base class for all package errors."""


class ValidationError(KickresError):
    """Malformed specification, configuration, or argument."""

    exit_code = 2


class TruncationError(KickresError):
    """Momentum-window tail mass exceeded the configured tolerance."""

    exit_code = 3


class ResourceCapError(KickresError):
    """A lattice or state would exceed the configured memory cap."""

    exit_code = 4
