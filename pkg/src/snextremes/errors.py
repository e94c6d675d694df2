"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class SNError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SNError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UsageError(SNError, ValueError):
    """An invalid combination of options (e.g. mismatched order and norming method)."""


class SolverError(SNError, RuntimeError):
    """A root finder could not bracket or converge.

    ``diagnostics`` holds whatever the solver knew when it gave up.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class PrecisionError(SNError, ArithmeticError):
    """A requested quantity is below the arithmetic noise floor of the computation."""


class ExpansionOverflowError(SNError, OverflowError):
    """``exp(-x)`` overflows for the requested argument."""


class ExportError(SNError, OSError):
    """Writing a table failed; ``bytes_written`` tells how much reached the sink."""

    def __init__(self, message, bytes_written=0):
        super().__init__(message)
        self.bytes_written = bytes_written
