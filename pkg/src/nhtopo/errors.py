"""Exception hierarchy shared by all modules.

The command-line front end maps these onto exit codes: configuration
problems (``ConfigError``) exit with status 2, everything derived from
``NumericalError`` exits with status 3.
"""


class NhtopoError(Exception):
    """Base class for all package errors."""


class ConfigError(NhtopoError, ValueError):
    """Invalid user input: parameters, flags, matrix shapes."""


class NumericalError(NhtopoError, ArithmeticError):
    """A computation could not produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """An iterative or eigen solver failed to converge."""


class GapClosingError(NumericalError):
    """The spectrum touches the reference energy on the integration loop.

    Raised at topological transition points where winding numbers and
    Zak phases are undefined.
    """

    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


class BandCrossingError(NumericalError):
    """Two bands touch on a loop where one of them is being transported."""

    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


class FactorizationError(NumericalError):
    """A characteristic polynomial does not match its closed-form factors."""


class TruncationOverflowError(NumericalError):
    """A truncated Fock-space construction exceeds the dimension guard."""
