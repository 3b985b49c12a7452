"""
Exception types raised by fourphoton.

Invalid input keeps the ``ValueError`` family so callers that catch
``ValueError`` still work; the subclasses let the command line map failures
to exit codes.
"""


class InvalidStateError(ValueError):
    """A quantum state violates a precondition (e.g. it is not normalized)."""


class ConfigError(ValueError):
    """A configuration file or data file is malformed."""


class FlatDataError(ValueError):
    """Data carries no shape to derive an initial guess from."""


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to reach its target."""
