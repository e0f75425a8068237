"""
Errors raised by pymaui.

Every error carries the process exit code the command line tool uses when
the error reaches it.
"""


class MauiError(Exception):
    exit_code = 3


class ConfigError(MauiError, ValueError):
    """Invalid run configuration or command line usage."""

    exit_code = 1


class DataError(MauiError, ValueError):
    """Input data cannot support the requested computation."""

    exit_code = 2


class StoreFormatError(DataError):
    pass


class DegenerateAggregateError(DataError):
    """The mean of a set of unit vectors is the zero vector."""


class DegenerateCentroidError(DataError):
    pass


class DegenerateConfigurationError(DataError):
    """A metric is undefined for the given sizes (e.g. N_q <= E_k)."""


class IncompatibleRunsError(DataError):
    pass


class InvariantError(MauiError, AssertionError):
    """An internal invariant did not hold."""

    exit_code = 3


class StageError(MauiError):
    """
    Failure of one pipeline stage.

    :param str stage: name of the failing stage
    :param Exception cause: the original error
    """

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__("stage '%s' failed: %s" % (stage, cause))
