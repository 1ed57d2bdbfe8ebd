"""Exception types shared across the package."""


class DigraphOtError(Exception):
    """Base class for all package errors."""


class InputError(DigraphOtError, ValueError):
    """Invalid user input: bad files, malformed graphs, out-of-range parameters."""


class NumericalError(DigraphOtError, RuntimeError):
    """A numerical procedure failed (singular system, residual too large, ...)."""
