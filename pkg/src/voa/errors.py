"""Exception types raised across the package."""


class VoaError(Exception):
    """Base class for all errors raised by :mod:`voa`."""


class DomainError(VoaError, ValueError):
    """A parameter lies outside the domain of the requested formula."""


class ConvergenceError(VoaError, RuntimeError):
    """A numerical routine failed to reach its tolerance."""


class TraceFormatError(VoaError, ValueError):
    """A trace or impression log record could not be parsed.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
